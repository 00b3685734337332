#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "slabroker/errors.hpp"

namespace slabroker {

// Append-only event log, one JSON object per line. State is rebuilt by
// replaying the file front to back; writers append and flush, never rewrite.
class JsonlStore {
public:
    explicit JsonlStore(std::filesystem::path path) : path_(std::move(path)) {
        std::error_code ec;
        if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
        if (ec) throw Error(Errc::Io, "cannot create '" + path_.parent_path().string() + "'");
    }

    const std::filesystem::path& path() const { return path_; }

    void append(const nlohmann::json& event) {
        if (!out_.is_open()) {
            out_.open(path_, std::ios::app | std::ios::binary);
            if (!out_) throw Error(Errc::Io, "cannot open '" + path_.string() + "' for append");
        }
        out_ << event.dump() << '\n';
        out_.flush();
        if (!out_) throw Error(Errc::Io, "append failed for '" + path_.string() + "'");
    }

    template <typename Fn>
    void replay(Fn&& fn) const {
        std::ifstream in(path_, std::ios::binary);
        if (!in) return;  // nothing recorded yet
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            nlohmann::json event;
            try {
                event = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw Error(Errc::MalformedRecord,
                            path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
            }
            fn(event);
        }
    }

private:
    std::filesystem::path path_;
    std::ofstream out_;
};

}  // namespace slabroker

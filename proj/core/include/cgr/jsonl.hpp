#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include "cgr/errors.hpp"

namespace cgr {

/// Streams a JSON Lines file, invoking `fn(line_number, raw_line)` for every
/// non-empty line. Line numbers are 1-based. Throws IoError when the file
/// cannot be opened. Parsing is left to the caller so that FormatError can
/// carry domain-specific messages.
void for_each_jsonl_line(const std::filesystem::path& path,
                         const std::function<void(std::size_t, const std::string&)>& fn);

/// Line-buffered JSON Lines writer. One `write` call emits one line.
class JsonlWriter {
public:
    explicit JsonlWriter(const std::filesystem::path& path);

    void write_line(const std::string& serialized_json);
    std::size_t lines_written() const { return lines_; }

private:
    std::ofstream out_;
    std::filesystem::path path_;
    std::size_t lines_ = 0;
};

}  // namespace cgr

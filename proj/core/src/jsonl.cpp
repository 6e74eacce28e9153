#include "cgr/jsonl.hpp"

namespace cgr {

void for_each_jsonl_line(const std::filesystem::path& path,
                         const std::function<void(std::size_t, const std::string&)>& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = line.find_first_not_of(" \t") == std::string::npos;
        if (blank) continue;
        fn(line_no, line);
    }
    if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
}

JsonlWriter::JsonlWriter(const std::filesystem::path& path) : path_(path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    out_.open(path, std::ios::trunc);
    if (!out_) throw IoError("cannot open '" + path.string() + "' for writing");
}

void JsonlWriter::write_line(const std::string& serialized_json) {
    out_ << serialized_json << '\n';
    if (!out_) throw IoError("write failure on '" + path_.string() + "'");
    ++lines_;
}

}  // namespace cgr

#include "agora/service/event_log.hpp"

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

namespace agora::service {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void storage(const std::string& what) {
    throw Error(ErrorCode::StorageFailure, what + ": " + std::strerror(errno));
}

void sync_dir(const fs::path& dir) {
    int fd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd < 0) storage("open directory " + dir.string());
    ::fsync(fd);
    ::close(fd);
}

}  // namespace

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::StorageFailure, "cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void atomic_write_file(const fs::path& path, const std::string& content) {
    const auto tmp = fs::path(path.string() + ".tmp");
    int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) storage("open " + tmp.string());
    std::size_t done = 0;
    while (done < content.size()) {
        auto n = ::write(fd, content.data() + done, content.size() - done);
        if (n < 0 && errno == EINTR) continue;
        if (n < 0) {
            ::close(fd);
            storage("write " + tmp.string());
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd) != 0) {
        ::close(fd);
        storage("fsync " + tmp.string());
    }
    ::close(fd);
    if (::rename(tmp.c_str(), path.c_str()) != 0) storage("rename " + tmp.string());
    sync_dir(path.parent_path());
}

FileEventLog::FileEventLog(fs::path path, int fd, std::int64_t last_seq, std::int64_t last_ts)
    : path_(std::move(path)), fd_(fd), last_seq_(last_seq), last_ts_(last_ts) {}

FileEventLog::~FileEventLog() {
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<FileEventLog> FileEventLog::create(const fs::path& path, const engine::LogHeader& header) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_APPEND | O_CLOEXEC, 0644);
    if (fd < 0) storage("create " + path.string());
    std::unique_ptr<FileEventLog> log(new FileEventLog(path, fd, 0, 0));
    log->write_all(header_to_json(header).dump() + "\n");
    sync_dir(path.parent_path());
    return log;
}

std::unique_ptr<FileEventLog> FileEventLog::reopen(const fs::path& path, std::int64_t last_seq, std::int64_t last_ts) {
    int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CLOEXEC);
    if (fd < 0) storage("open " + path.string());
    return std::unique_ptr<FileEventLog>(new FileEventLog(path, fd, last_seq, last_ts));
}

void FileEventLog::write_all(const std::string& bytes) {
    if (fault_) {
        try {
            fault_();
        } catch (...) {
            failed_ = true;
            throw;
        }
    }
    std::size_t done = 0;
    while (done < bytes.size()) {
        auto n = ::write(fd_, bytes.data() + done, bytes.size() - done);
        if (n < 0 && errno == EINTR) continue;
        if (n < 0) {
            failed_ = true;
            storage("append " + path_.string());
        }
        done += static_cast<std::size_t>(n);
    }
    if (::fdatasync(fd_) != 0) {
        failed_ = true;
        storage("fdatasync " + path_.string());
    }
}

void FileEventLog::append(const std::vector<engine::CommittedEvent>& events) {
    if (failed_) throw Error(ErrorCode::StorageFailure, "event log is failed; nothing more is appended");
    std::string batch;
    auto seq = last_seq_;
    auto ts = last_ts_;
    for (auto& e : events) {
        if (e.seq != seq + 1)
            throw Error(ErrorCode::ClockRegression, "event seq " + std::to_string(e.seq) + " does not follow " + std::to_string(seq));
        if (e.ts < ts)
            throw Error(ErrorCode::ClockRegression, "event " + std::to_string(e.seq) + " is earlier than its predecessor");
        seq = e.seq;
        ts = e.ts;
        batch += safe_dump(event_to_json(e)) + "\n";
    }
    write_all(batch);
    last_seq_ = seq;
    last_ts_ = ts;
}

LoadedLog read_log(const fs::path& path) {
    const auto text = read_file(path);
    LoadedLog out;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            out.torn_tail = true;
            break;
        }
        auto line = std::string_view(text).substr(pos, nl - pos);
        auto j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error(ErrorCode::CorruptLog, "unreadable line at byte " + std::to_string(pos));
        if (header) {
            out.header = engine::header_from_json(j);
            out.header_end = nl + 1;
            header = false;
        } else {
            out.events.push_back(engine::event_from_json(j));
            out.line_ends.push_back(nl + 1);
        }
        pos = nl + 1;
    }
    if (header) throw Error(ErrorCode::CorruptLog, "log has no complete header: " + path.string());
    return out;
}

RecoveredLog recover_log(const fs::path& path) {
    auto loaded = read_log(path);
    auto result = engine::replay(loaded.header, loaded.events, true);
    RecoveredLog out;
    out.header = loaded.header;
    out.dropped_events = loaded.events.size() - result.applied;
    const std::uint64_t keep = result.applied == 0 ? loaded.header_end : loaded.line_ends[result.applied - 1];
    const auto size = fs::file_size(path);
    out.dropped_bytes = size - keep;
    if (keep != size) {
        std::error_code ec;
        fs::resize_file(path, keep, ec);
        if (ec) throw Error(ErrorCode::StorageFailure, "cannot truncate " + path.string() + ": " + ec.message());
        int fd = ::open(path.c_str(), O_WRONLY | O_CLOEXEC);
        if (fd >= 0) {
            ::fsync(fd);
            ::close(fd);
        }
    }
    loaded.events.resize(result.applied);
    out.events = std::move(loaded.events);
    out.state = std::move(result.state);
    return out;
}

}  // namespace agora::service

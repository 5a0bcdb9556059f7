#pragma once

#include <filesystem>
#include <functional>
#include <memory>

#include "agora/engine/replay.hpp"
#include "agora/engine/session.hpp"

namespace agora::service {

/// Append-only JSONL event log. Line 1 is the header (engine::header_to_json);
/// every further line is one engine::event_to_json record. Each append writes
/// its whole batch and fdatasyncs before returning, so a commit is durable
/// before anyone hears about it.
class FileEventLog : public engine::EventSink {
public:
    /// Writes the header of a new log. Error(StorageFailure) if the file
    /// exists or cannot be written.
    static std::unique_ptr<FileEventLog> create(const std::filesystem::path& path, const engine::LogHeader& header);
    /// Appends to a log that recover_log has already cut back to whole events.
    static std::unique_ptr<FileEventLog> reopen(const std::filesystem::path& path, std::int64_t last_seq,
                                                std::int64_t last_ts);
    ~FileEventLog() override;

    /// Error(ClockRegression) for a seq gap or a timestamp behind its
    /// predecessor, Error(StorageFailure) when the disk refuses. After a
    /// failure the log refuses every further append.
    void append(const std::vector<engine::CommittedEvent>& events) override;

    /// Test hook run before each write; throwing simulates a failing disk.
    void set_fault(std::function<void()> fault) { fault_ = std::move(fault); }
    const std::filesystem::path& path() const { return path_; }

private:
    FileEventLog(std::filesystem::path path, int fd, std::int64_t last_seq, std::int64_t last_ts);
    void write_all(const std::string& bytes);

    std::filesystem::path path_;
    int fd_ = -1;
    std::int64_t last_seq_ = 0;
    std::int64_t last_ts_ = 0;
    bool failed_ = false;
    std::function<void()> fault_;
};

struct LoadedLog {
    engine::LogHeader header;
    std::vector<engine::CommittedEvent> events;
    /// Byte offset just past each event's line.
    std::vector<std::uint64_t> line_ends;
    std::uint64_t header_end = 0;
    /// The file ends in a line that was never completed.
    bool torn_tail = false;
};

/// Reads a log. A final line without its newline is a torn write and is
/// ignored; any other unreadable line is Error(CorruptLog).
LoadedLog read_log(const std::filesystem::path& path);

struct RecoveredLog {
    engine::LogHeader header;
    std::vector<engine::CommittedEvent> events;
    engine::SessionState state;
    std::size_t dropped_events = 0;
    std::uint64_t dropped_bytes = 0;
};

/// Replays a log after a crash. A torn last line and a trailing system batch
/// that was never completely written are cut off the file, which is synced,
/// so the log again holds exactly the replayed events.
RecoveredLog recover_log(const std::filesystem::path& path);

/// Writes through a temporary file, fsync and rename, then syncs the directory.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace agora::service

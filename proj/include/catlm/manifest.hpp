#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace catlm {

// Reproducibility record of one pipeline run: config snapshot, input
// hashes, seeds, and a content hash per artifact. Timestamps honour
// SOURCE_DATE_EPOCH so reruns can be byte-identical.
class RunManifest {
public:
    explicit RunManifest(std::filesystem::path run_dir);

    void set_config_text(std::string config_snapshot);
    void set_seed(const std::string& name, uint64_t value);
    void add_input(const std::string& label, const std::filesystem::path& path);
    // path must live under the run directory; recorded relative to it
    void add_artifact(const std::filesystem::path& path);

    void write() const;  // <run_dir>/manifest.json

    // Re-hashes every artifact recorded in <run_dir>/manifest.json.
    // Throws ManifestMismatch on the first difference.
    static void verify(const std::filesystem::path& run_dir);

private:
    std::filesystem::path run_dir_;
    std::string config_text_;
    std::map<std::string, uint64_t> seeds_;
    std::map<std::string, std::pair<std::string, uint64_t>> inputs_;     // label -> (sha, bytes)
    std::map<std::string, std::pair<std::string, uint64_t>> artifacts_;  // relpath -> (sha, bytes)
};

// RAII lock file; a held lock raises LockHeld.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& run_dir);
    ~RunLock();
    RunLock(const RunLock&) = delete;
    RunLock& operator=(const RunLock&) = delete;

private:
    std::filesystem::path lock_path_;
    int fd_ = -1;
};

}  // namespace catlm

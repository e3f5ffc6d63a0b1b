#include "catlm/manifest.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "catlm/error.hpp"
#include "catlm/sha256.hpp"

namespace catlm {

using json = nlohmann::ordered_json;

namespace {

std::string iso_timestamp() {
    std::time_t t;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
        t = std::time_t(std::strtoll(epoch, nullptr, 10));
    else
        t = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::pair<std::string, uint64_t> hash_and_size(const std::filesystem::path& path) {
    return {sha256_file_hex(path), uint64_t(std::filesystem::file_size(path))};
}

}  // namespace

RunManifest::RunManifest(std::filesystem::path run_dir) : run_dir_(std::move(run_dir)) {}

void RunManifest::set_config_text(std::string config_snapshot) {
    config_text_ = std::move(config_snapshot);
}

void RunManifest::set_seed(const std::string& name, uint64_t value) { seeds_[name] = value; }

void RunManifest::add_input(const std::string& label, const std::filesystem::path& path) {
    inputs_[label + ":" + path.string()] = hash_and_size(path);
}

void RunManifest::add_artifact(const std::filesystem::path& path) {
    std::string rel = std::filesystem::relative(path, run_dir_).generic_string();
    artifacts_[rel] = hash_and_size(path);
}

void RunManifest::write() const {
    json j;
    j["format"] = "catlm-run-manifest";
    j["version"] = 1;
    j["created"] = iso_timestamp();
    j["config"] = config_text_;
    j["seeds"] = json::object();
    for (const auto& [name, value] : seeds_) j["seeds"][name] = value;
    j["inputs"] = json::object();
    for (const auto& [key, hs] : inputs_)
        j["inputs"][key] = {{"sha256", hs.first}, {"bytes", hs.second}};
    j["artifacts"] = json::object();
    for (const auto& [rel, hs] : artifacts_)
        j["artifacts"][rel] = {{"sha256", hs.first}, {"bytes", hs.second}};

    std::ofstream out(run_dir_ / "manifest.json", std::ios::binary);
    if (!out) raise(Err::IoError, "cannot write manifest in " + run_dir_.string());
    out << j.dump(2) << "\n";
    if (!out) raise(Err::IoError, "manifest write failed");
}

void RunManifest::verify(const std::filesystem::path& run_dir) {
    std::ifstream in(run_dir / "manifest.json");
    if (!in) raise(Err::IoError, "no manifest.json in " + run_dir.string());
    json j = json::parse(in, nullptr, false);
    require(!j.is_discarded(), Err::ManifestMismatch, "manifest.json is not valid JSON");
    require(j.value("format", "") == "catlm-run-manifest", Err::ManifestMismatch,
            "not a run manifest");
    for (const auto& [rel, meta] : j.at("artifacts").items()) {
        std::filesystem::path path = run_dir / rel;
        require(std::filesystem::exists(path), Err::ManifestMismatch, "missing artifact " + rel);
        auto [sha, bytes] = hash_and_size(path);
        require(bytes == meta.at("bytes").get<uint64_t>(), Err::ManifestMismatch,
                "size mismatch for " + rel);
        require(sha == meta.at("sha256").get<std::string>(), Err::ManifestMismatch,
                "hash mismatch for " + rel);
    }
}

RunLock::RunLock(const std::filesystem::path& run_dir) : lock_path_(run_dir / ".lock") {
    std::filesystem::create_directories(run_dir);
    fd_ = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
        raise(Err::LockHeld, "run directory locked (" + lock_path_.string() +
                                 " exists); remove it if no run is active");
}

RunLock::~RunLock() {
    if (fd_ >= 0) {
        ::close(fd_);
        std::error_code ec;
        std::filesystem::remove(lock_path_, ec);
    }
}

}  // namespace catlm

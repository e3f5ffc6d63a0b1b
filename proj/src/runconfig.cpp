#include "catlm/runconfig.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "catlm/error.hpp"

namespace catlm {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

uint64_t to_u64(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        uint64_t v = std::stoull(value, &used);
        require(used == value.size(), Err::ConfigError, key + ": not an integer: " + value);
        return v;
    } catch (const CatlmError&) {
        throw;
    } catch (...) {
        raise(Err::ConfigError, key + ": not an integer: " + value);
    }
}

int to_int(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        int v = std::stoi(value, &used);
        require(used == value.size(), Err::ConfigError, key + ": not an integer: " + value);
        return v;
    } catch (const CatlmError&) {
        throw;
    } catch (...) {
        raise(Err::ConfigError, key + ": not an integer: " + value);
    }
}

double to_double(const std::string& key, const std::string& value) {
    try {
        size_t used = 0;
        double v = std::stod(value, &used);
        require(used == value.size(), Err::ConfigError, key + ": not a number: " + value);
        return v;
    } catch (const CatlmError&) {
        throw;
    } catch (...) {
        raise(Err::ConfigError, key + ": not a number: " + value);
    }
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    raise(Err::ConfigError, key + ": not a boolean: " + value);
}

}  // namespace

void RunConfig::set(const std::string& dotted_key, const std::string& value) {
    const std::string& k = dotted_key;
    if (k == "run.seed") seed = to_u64(k, value);
    else if (k == "run.annotator") annotator = value;
    else if (k == "corpus.split_seed") split_seed = to_u64(k, value);
    else if (k == "charlm.hidden_size") lm.hidden_size = to_int(k, value);
    else if (k == "charlm.num_layers") lm.num_layers = to_int(k, value);
    else if (k == "charlm.embedding_size") lm.embedding_size = to_int(k, value);
    else if (k == "charlm.bptt_len") lm.bptt_len = to_int(k, value);
    else if (k == "charlm.batch_size") lm.batch_size = to_int(k, value);
    else if (k == "charlm.learning_rate") lm.learning_rate = to_double(k, value);
    else if (k == "charlm.grad_clip") lm.grad_clip = to_double(k, value);
    else if (k == "charlm.lr_decay") lm.lr_decay = to_double(k, value);
    else if (k == "charlm.epochs") lm.epochs = to_int(k, value);
    else if (k == "charlm.snapshot_every") lm.snapshot_every = to_int(k, value);
    else if (k == "charlm.seed") lm.seed = to_u64(k, value);
    else if (k == "babbler.mode") {
        if (value == "multinomial") babble_mode = BabbleMode::Multinomial;
        else if (value == "greedy") babble_mode = BabbleMode::Greedy;
        else raise(Err::ConfigError, k + ": expected multinomial or greedy, got " + value);
    }
    else if (k == "babbler.temperature") temperature = to_double(k, value);
    else if (k == "babbler.target_tokens") target_tokens = to_u64(k, value);
    else if (k == "babbler.seed") babble_seed = to_u64(k, value);
    else if (k == "constructicon.min_sent_len") build.min_sent_len = to_int(k, value);
    else if (k == "constructicon.max_sent_len") build.max_sent_len = to_int(k, value);
    else if (k == "constructicon.max_catena_len") build.max_catena_len = to_int(k, value);
    else if (k == "constructicon.min_freq") build.min_freq = to_u64(k, value);
    else if (k == "constructicon.all_mixes") build.all_mixes = to_bool(k, value);
    else if (k == "constructicon.top_k") top_k = to_u64(k, value);
    else if (k == "constructicon.rank_by") {
        if (value == "mi") rank_by = Constructicon::RankBy::Mi;
        else if (value == "frequency") rank_by = Constructicon::RankBy::Frequency;
        else raise(Err::ConfigError, k + ": expected mi or frequency, got " + value);
    }
    else if (k == "semspace.dim") dim = to_int(k, value);
    else if (k == "semspace.num_targets") num_targets = to_u64(k, value);
    else if (k == "semspace.num_contexts") num_contexts = to_u64(k, value);
    else if (k == "semspace.oversample") svd.oversample = to_int(k, value);
    else if (k == "semspace.power_iterations") svd.power_iterations = to_int(k, value);
    else if (k == "semspace.sigma_exponent") svd.sigma_exponent = to_double(k, value);
    else if (k == "abstraction.pair_min_freq") pairs.min_freq = to_u64(k, value);
    else if (k == "abstraction.min_arity") pairs.min_arity = to_int(k, value);
    else if (k == "abstraction.max_arity") pairs.max_arity = to_int(k, value);
    else if (k == "abstraction.bin_low") bin_low = to_double(k, value);
    else if (k == "abstraction.bin_high") bin_high = to_double(k, value);
    else if (k == "abstraction.group_by") {
        if (value == "cat1") group_by = GroupBy::Cat1;
        else if (value == "cat2") group_by = GroupBy::Cat2;
        else raise(Err::ConfigError, k + ": expected cat1 or cat2, got " + value);
    }
    else raise(Err::ConfigError, "unknown config key: " + k);
}

void RunConfig::apply_env() {
    if (const char* env = std::getenv("CATLM_SEED")) seed = to_u64("CATLM_SEED", env);
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line, section;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            require(line.back() == ']', Err::ConfigError,
                    "config line " + std::to_string(line_no) + ": unterminated section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        size_t eq = line.find('=');
        require(eq != std::string::npos, Err::ConfigError,
                "config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        require(!section.empty(), Err::ConfigError,
                "config line " + std::to_string(line_no) + ": key outside any [section]");
        config.set(section + "." + key, value);
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(Err::IoError, "cannot open config " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace catlm

// catlm - catena extraction and language-model babbling pipeline.
//
// Subcommands map 1:1 onto the library operations; `run-all` chains the
// whole pipeline into a reproducible run directory with a manifest.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "catlm/abstraction.hpp"
#include "catlm/babbler.hpp"
#include "catlm/catenae.hpp"
#include "catlm/charlm.hpp"
#include "catlm/constructicon.hpp"
#include "catlm/corpus.hpp"
#include "catlm/error.hpp"
#include "catlm/manifest.hpp"
#include "catlm/runconfig.hpp"
#include "catlm/semspace.hpp"
#include "catlm/toytext.hpp"
#include "catlm/treebank.hpp"
#include "catlm/utf8.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace catlm;

namespace {

int exit_code_for(Err code) {
    switch (code) {
        case Err::ConfigError: return 2;
        case Err::IoError: return 3;
        case Err::EmptyCorpus:
        case Err::EncodingError: return 4;
        case Err::MalformedLine:
        case Err::MalformedTree:
        case Err::CyclicTree:
        case Err::MultiRooted: return 5;
        case Err::DivergedTraining:
        case Err::DegenerateVocab:
        case Err::UnknownCharId:
        case Err::BadCheckpoint: return 6;
        case Err::StalledBabbling: return 7;
        case Err::AnnotatorFailed: return 8;
        case Err::ManifestMismatch: return 10;
        case Err::LockHeld: return 11;
        default: return 9;  // analysis errors
    }
}

struct CliState {
    RunConfig config;
    std::vector<std::string> overrides;  // section.key=value
    std::string config_path;

    void finalize() {
        if (!config_path.empty()) config = load_config(config_path);
        for (const std::string& kv : overrides) {
            size_t eq = kv.find('=');
            require(eq != std::string::npos, Err::ConfigError,
                    "--set expects section.key=value, got " + kv);
            config.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        config.apply_env();
    }

    std::string config_snapshot() const {
        std::ostringstream out;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            out << in.rdbuf();
        }
        for (const std::string& kv : overrides) out << "# override: " << kv << "\n";
        return out.str();
    }
};

std::string stats_to_json(const LengthStats& stats) {
    json j;
    j["mean_len"] = stats.mean_len;
    j["std_len"] = stats.std_len;
    json dist = json::object();
    for (auto [cp, p] : stats.initial_char_dist) {
        std::string key;
        utf8_append(key, cp);
        dist[key] = p;
    }
    j["initial_char_dist"] = dist;
    return j.dump(2);
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(Err::IoError, "cannot write " + path.string());
    out << content;
    if (!out) raise(Err::IoError, "write failed for " + path.string());
}

std::vector<DepTree> load_trees(const fs::path& conllu) {
    return parse_conllu_file(conllu, ParsePolicy::SkipInvalid, &std::cerr);
}

Constructicon load_constructicon(const fs::path& tsv) {
    std::ifstream in(tsv);
    if (!in) raise(Err::IoError, "cannot open " + tsv.string());
    return Constructicon::load_tsv(in);
}

Constructicon build_constructicon(const std::vector<DepTree>& trees, const RunConfig& config) {
    return Constructicon::build(trees, config.build);
}

EmbeddingSpace build_space(const std::vector<DepTree>& trees,
                           const std::vector<std::string>& targets,
                           const std::vector<std::string>& contexts, const RunConfig& config) {
    CoocParams cp;
    cp.min_sent_len = config.build.min_sent_len;
    cp.max_sent_len = config.build.max_sent_len;
    cp.min_arity = config.pairs.min_arity;
    cp.max_arity = config.pairs.max_arity;
    auto cooc = cooccurrences(trees, targets, contexts, cp);
    auto weighted = ppmi(cooc);
    return svd_reduce(weighted, config.dim, config.svd);
}

// ---------------------------------------------------------------- run-all

struct RunAll {
    fs::path input;
    fs::path run_dir;

    int execute(CliState& cli) {
        RunConfig& config = cli.config;
        require(!config.annotator.empty(), Err::ConfigError,
                "run-all needs an annotator command (run.annotator or --annotator)");
        RunLock lock(run_dir);
        RunManifest manifest(run_dir);
        manifest.set_config_text(cli.config_snapshot());
        manifest.set_seed("global", config.seed);
        manifest.set_seed("split", config.effective_split_seed());
        manifest.set_seed("charlm", config.effective_lm_seed());
        manifest.set_seed("babble", config.effective_babble_seed());

        for (const char* sub : {"corpus", "checkpoints", "babble", "conllu", "constructicons",
                                "spaces", "reports"})
            fs::create_directories(run_dir / sub);

        manifest.add_input("corpus", input);
        std::cerr << "[run] splitting corpus\n";
        auto splits = load_corpus(input, config.effective_split_seed());
        write_splits(splits, run_dir / "corpus" / "input");
        for (const char* ext : {".train", ".valid", ".test"})
            manifest.add_artifact(run_dir / "corpus" / ("input" + std::string(ext)));

        auto stats = sentence_stats(splits.train);
        write_text_file(run_dir / "reports" / "input_stats.json", stats_to_json(stats) + "\n");
        manifest.add_artifact(run_dir / "reports" / "input_stats.json");

        std::cerr << "[run] training\n";
        LMConfig lm = config.lm;
        lm.seed = config.effective_lm_seed();
        auto checkpoints = train(splits, lm, &std::cerr);

        struct Stage {
            std::string name;
            int epoch;
            const Checkpoint* checkpoint;
        };
        std::vector<Stage> stages;
        for (const Checkpoint& cp : checkpoints) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "epoch_%03d", cp.epoch);
            stages.push_back({cp.best ? "best" : buf, cp.epoch, &cp});
        }
        for (const Stage& stage : stages) {
            fs::path path = run_dir / "checkpoints" / (stage.name + ".clmb");
            stage.checkpoint->save(path);
            manifest.add_artifact(path);
        }

        const uint64_t target =
            config.target_tokens ? config.target_tokens : splits.train.token_count;
        std::vector<std::pair<std::string, fs::path>> texts;  // name -> raw text path
        texts.emplace_back("input", run_dir / "corpus" / "input.train");
        for (const Stage& stage : stages) {
            std::cerr << "[run] babbling " << stage.name << "\n";
            BabbleConfig bc;
            bc.mode = config.babble_mode;
            bc.temperature = config.temperature;
            bc.target_tokens = target;
            bc.seed = config.effective_babble_seed() + uint64_t(stage.epoch) +
                      (stage.checkpoint->best ? 1000000 : 0);
            auto text = babble(*stage.checkpoint, stats, bc);
            fs::path path = run_dir / "babble" / (stage.name + ".txt");
            write_corpus(text, path);
            manifest.add_artifact(path);
            texts.emplace_back(stage.name, path);
        }

        std::map<std::string, std::vector<DepTree>> treebanks;
        for (const auto& [name, path] : texts) {
            std::cerr << "[run] annotating " << name << "\n";
            fs::path conllu = run_dir / "conllu" / (name + ".conllu");
            run_annotator(path, config.annotator, conllu);
            treebanks[name] = load_trees(conllu);
            manifest.add_artifact(conllu);
        }

        std::map<std::string, Constructicon> inventories;
        for (const auto& [name, path] : texts) {
            std::cerr << "[run] ranking " << name << "\n";
            inventories.emplace(name, build_constructicon(treebanks.at(name), config));
            fs::path tsv = run_dir / "constructicons" / (name + ".tsv");
            std::ofstream out(tsv, std::ios::binary);
            inventories.at(name).dump_tsv(out);
            out.close();
            manifest.add_artifact(tsv);
        }

        std::cerr << "[run] comparing constructicons\n";
        {
            std::ostringstream rho, jac;
            rho << "name";
            for (const auto& [name, path] : texts) rho << '\t' << name;
            rho << '\n';
            jac.str(rho.str());
            jac.seekp(0, std::ios_base::end);
            for (const auto& [a, pa] : texts) {
                rho << a;
                jac << a;
                for (const auto& [b, pb] : texts) {
                    if (a == b) {
                        rho << "\t1";
                        jac << "\t1";
                        continue;
                    }
                    auto report = Constructicon::compare(inventories.at(a), inventories.at(b),
                                                         config.top_k, config.rank_by);
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), "%.6g", report.spearman_rho);
                    rho << '\t' << buf;
                    std::snprintf(buf, sizeof(buf), "%.6g", report.jaccard);
                    jac << '\t' << buf;
                }
                rho << '\n';
                jac << '\n';
            }
            write_text_file(run_dir / "reports" / "spearman_matrix.tsv", rho.str());
            write_text_file(run_dir / "reports" / "jaccard_matrix.tsv", jac.str());
            manifest.add_artifact(run_dir / "reports" / "spearman_matrix.tsv");
            manifest.add_artifact(run_dir / "reports" / "jaccard_matrix.tsv");
        }

        std::cerr << "[run] building spaces\n";
        auto targets = select_targets(inventories.at("input"), config.num_targets,
                                      config.pairs.min_arity, config.pairs.max_arity);
        auto contexts = select_targets(inventories.at("input"), config.num_contexts,
                                       config.pairs.min_arity, config.pairs.max_arity);
        std::map<std::string, EmbeddingSpace> spaces;
        for (const auto& [name, path] : texts) {
            spaces.emplace(name, build_space(treebanks.at(name), targets, contexts, config));
            fs::path out = run_dir / "spaces" / (name + ".cspc");
            spaces.at(name).save(out);
            manifest.add_artifact(out);
        }

        std::cerr << "[run] minimal pairs and shifts\n";
        auto pairs = extract_minimal_pairs(treebanks.at("input"), inventories.at("input"),
                                           config.pairs);
        {
            std::ostringstream out;
            out << "cat1\tcat2\twitnesses\n";
            for (const MinimalPair& p : pairs)
                out << p.cat1 << '\t' << p.cat2 << '\t' << p.witness_count << '\n';
            write_text_file(run_dir / "reports" / "pairs.tsv", out.str());
            manifest.add_artifact(run_dir / "reports" / "pairs.tsv");
        }

        std::vector<EmbeddingSpace> stage_spaces;
        for (const Stage& stage : stages)
            if (!stage.checkpoint->best) stage_spaces.push_back(spaces.at(stage.name));
        auto records = compute_shifts(pairs, spaces.at("input"), spaces.at("best"), stage_spaces,
                                      &std::cerr);
        {
            std::ostringstream out;
            write_shifts_tsv(out, records);
            write_text_file(run_dir / "reports" / "shifts.tsv", out.str());
            manifest.add_artifact(run_dir / "reports" / "shifts.tsv");
        }

        for (GroupBy by : {GroupBy::Cat1, GroupBy::Cat2}) {
            const char* label = by == GroupBy::Cat1 ? "cat1" : "cat2";
            std::cerr << "[run] hypothesis test on " << label << "\n";
            fs::path groups_path = run_dir / "reports" / (std::string("groups_") + label + ".tsv");
            fs::path report_path =
                run_dir / "reports" / (std::string("hypothesis_") + label + ".json");
            try {
                auto groups = group_averages(records, by);
                std::ostringstream out;
                write_groups_tsv(out, groups);
                write_text_file(groups_path, out.str());
                auto report = bin_and_test(groups, config.bin_low, config.bin_high);
                write_text_file(report_path, report.to_json_string() + "\n");
            } catch (const CatlmError& e) {
                // desk-scale runs may not populate every bin; record why
                json j;
                j["error"] = err_name(e.code());
                j["message"] = e.what();
                write_text_file(report_path, j.dump(2) + "\n");
                if (!fs::exists(groups_path)) write_text_file(groups_path, "key\tmean_shift\tmean_cos_input\tn\n");
            }
            manifest.add_artifact(groups_path);
            manifest.add_artifact(report_path);
        }

        manifest.write();
        std::cout << "run complete: " << (run_dir / "manifest.json").string() << "\n";
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"catlm - catenae, constructicons and babbling analysis"};
    app.require_subcommand(1);

    CliState cli;
    app.add_option("--config", cli.config_path, "Config file (flat key = value with [sections])");
    app.add_option("--set", cli.overrides, "Override a config key: section.key=value")
        ->take_all();

    // ---- split
    auto* cmd_split = app.add_subcommand("split", "80/10/10 sentence split of a corpus");
    fs::path split_input, split_prefix;
    cmd_split->add_option("--input", split_input, "Corpus file, one sentence per line")
        ->required();
    cmd_split->add_option("--out-prefix", split_prefix, "Prefix for .train/.valid/.test")
        ->required();

    // ---- stats
    auto* cmd_stats = app.add_subcommand("stats", "Sentence length and initial-character stats");
    fs::path stats_input, stats_out;
    cmd_stats->add_option("--input", stats_input, "Corpus file")->required();
    cmd_stats->add_option("--out", stats_out, "Write JSON here instead of stdout");

    // ---- train
    auto* cmd_train = app.add_subcommand("train", "Train the character LSTM");
    fs::path train_corpus, train_out_dir;
    cmd_train->add_option("--input", train_corpus, "Corpus file (split internally)")->required();
    cmd_train->add_option("--out-dir", train_out_dir, "Checkpoint directory")->required();

    // ---- babble
    auto* cmd_babble = app.add_subcommand("babble", "Sample text from a checkpoint");
    fs::path babble_checkpoint, babble_stats_from, babble_out;
    uint64_t babble_tokens = 0;
    cmd_babble->add_option("--checkpoint", babble_checkpoint, "Checkpoint file")->required();
    cmd_babble
        ->add_option("--stats-from", babble_stats_from,
                     "Corpus whose length stats drive the stopping rules (default: required)")
        ->required();
    cmd_babble->add_option("--out", babble_out, "Output text file")->required();
    cmd_babble->add_option("--target-tokens", babble_tokens,
                           "Token target (default: stats corpus token count)");

    // ---- annotate
    auto* cmd_annotate = app.add_subcommand("annotate", "Run the external annotator");
    fs::path annotate_input, annotate_out;
    std::string annotate_command;
    cmd_annotate->add_option("--input", annotate_input, "Raw text file")->required();
    cmd_annotate->add_option("--out", annotate_out, "CoNLL-U output path")->required();
    cmd_annotate->add_option("--command", annotate_command,
                             "Command template with {input} and {output}");

    // ---- extract
    auto* cmd_extract = app.add_subcommand("extract", "Dump catena renderings with counts");
    fs::path extract_conllu, extract_out;
    cmd_extract->add_option("--conllu", extract_conllu, "CoNLL-U treebank")->required();
    cmd_extract->add_option("--out", extract_out, "TSV output (rendering, count)")->required();

    // ---- rank
    auto* cmd_rank = app.add_subcommand("rank", "Build an MI-ranked constructicon");
    fs::path rank_conllu, rank_out;
    cmd_rank->add_option("--conllu", rank_conllu, "CoNLL-U treebank")->required();
    cmd_rank->add_option("--out", rank_out, "Constructicon TSV")->required();

    // ---- compare
    auto* cmd_compare = app.add_subcommand("compare", "Spearman/Jaccard of constructicons");
    std::vector<fs::path> compare_inputs;
    fs::path compare_matrix;
    cmd_compare->add_option("--inputs", compare_inputs, "Two or more constructicon TSVs")
        ->required()
        ->expected(-2);
    cmd_compare->add_option("--matrix-out", compare_matrix,
                            "Write the pairwise Spearman matrix here");

    // ---- space
    auto* cmd_space = app.add_subcommand("space", "Build a PPMI+SVD embedding space");
    fs::path space_conllu, space_targets_from, space_out, space_tsv;
    cmd_space->add_option("--conllu", space_conllu, "CoNLL-U treebank")->required();
    cmd_space
        ->add_option("--targets-from", space_targets_from,
                     "Constructicon TSV supplying the target/context inventories")
        ->required();
    cmd_space->add_option("--out", space_out, "Binary space output")->required();
    cmd_space->add_option("--tsv-out", space_tsv, "Optional TSV export of the vectors");

    // ---- pairs
    auto* cmd_pairs = app.add_subcommand("pairs", "Extract minimal pairs from a treebank");
    fs::path pairs_conllu, pairs_constructicon, pairs_out;
    cmd_pairs->add_option("--conllu", pairs_conllu, "CoNLL-U treebank")->required();
    cmd_pairs->add_option("--constructicon", pairs_constructicon, "Constructicon TSV")
        ->required();
    cmd_pairs->add_option("--out", pairs_out, "Pairs TSV")->required();

    // ---- shift
    auto* cmd_shift = app.add_subcommand("shift", "Cosine trajectories for minimal pairs");
    fs::path shift_pairs, shift_input_space, shift_best_space, shift_out;
    std::vector<fs::path> shift_stage_spaces;
    cmd_shift->add_option("--pairs", shift_pairs, "Pairs TSV (cat1, cat2, witnesses)")
        ->required();
    cmd_shift->add_option("--input-space", shift_input_space, "Space built from the input")
        ->required();
    cmd_shift->add_option("--best-space", shift_best_space, "Space of the best model")
        ->required();
    cmd_shift
        ->add_option("--stage-spaces", shift_stage_spaces,
                     "Stage spaces in ascending epoch order (at least 2)")
        ->required()
        ->expected(-2);
    cmd_shift->add_option("--out", shift_out, "Shift table TSV")->required();

    // ---- test
    auto* cmd_test = app.add_subcommand("test", "Group shifts and run the hypothesis test");
    fs::path test_shifts, test_report, test_groups;
    cmd_test->add_option("--shifts", test_shifts, "Shift table TSV")->required();
    cmd_test->add_option("--report-out", test_report, "Hypothesis report JSON")->required();
    cmd_test->add_option("--groups-out", test_groups, "Grouped averages TSV");

    // ---- run-all
    auto* cmd_run = app.add_subcommand("run-all", "Full pipeline into a run directory");
    RunAll run_all;
    std::string run_annotator_flag;
    cmd_run->add_option("--input", run_all.input, "Corpus file")->required();
    cmd_run->add_option("--run-dir", run_all.run_dir, "Run directory")->required();
    cmd_run->add_option("--annotator", run_annotator_flag,
                        "Annotator command template (overrides run.annotator)");

    // ---- verify
    auto* cmd_verify = app.add_subcommand("verify", "Re-hash the artifacts of a run");
    fs::path verify_dir;
    cmd_verify->add_option("--run-dir", verify_dir, "Run directory with manifest.json")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        cli.finalize();
        RunConfig& config = cli.config;

        if (*cmd_split) {
            auto splits = load_corpus(split_input, config.effective_split_seed());
            write_splits(splits, split_prefix);
            std::cout << "train " << splits.train.sentences.size() << " sentences, "
                      << splits.train.token_count << " tokens\n"
                      << "valid " << splits.validation.sentences.size() << " sentences\n"
                      << "test " << splits.test.sentences.size() << " sentences\n";
        } else if (*cmd_stats) {
            auto stats = sentence_stats(read_corpus(stats_input));
            std::string body = stats_to_json(stats) + "\n";
            if (stats_out.empty())
                std::cout << body;
            else
                write_text_file(stats_out, body);
        } else if (*cmd_train) {
            auto splits = load_corpus(train_corpus, config.effective_split_seed());
            LMConfig lm = config.lm;
            lm.seed = config.effective_lm_seed();
            auto checkpoints = train(splits, lm, &std::cerr);
            fs::create_directories(train_out_dir);
            for (const Checkpoint& cp : checkpoints) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "epoch_%03d.clmb", cp.epoch);
                fs::path path = train_out_dir / (cp.best ? "best.clmb" : buf);
                cp.save(path);
                std::cout << path.string() << " valid_bpc " << cp.valid_bpc << "\n";
            }
        } else if (*cmd_babble) {
            auto checkpoint = Checkpoint::load(babble_checkpoint);
            auto stats_corpus = read_corpus(babble_stats_from);
            auto stats = sentence_stats(stats_corpus);
            BabbleConfig bc;
            bc.mode = config.babble_mode;
            bc.temperature = config.temperature;
            bc.target_tokens = babble_tokens         ? babble_tokens
                               : config.target_tokens ? config.target_tokens
                                                      : stats_corpus.token_count;
            bc.seed = config.effective_babble_seed();
            auto text = babble(checkpoint, stats, bc);
            write_corpus(text, babble_out);
            std::cout << text.sentences.size() << " sentences, " << text.token_count
                      << " tokens\n";
        } else if (*cmd_annotate) {
            std::string command = annotate_command.empty() ? config.annotator : annotate_command;
            require(!command.empty(), Err::ConfigError,
                    "no annotator command (--command or run.annotator)");
            run_annotator(annotate_input, command, annotate_out);
            auto trees = load_trees(annotate_out);
            std::cout << trees.size() << " trees\n";
        } else if (*cmd_extract) {
            auto trees = load_trees(extract_conllu);
            std::map<std::string, uint64_t> counts;
            LevelMode mode =
                config.build.all_mixes ? LevelMode::AllMixes() : LevelMode::Single(config.build.single_level);
            for (const DepTree& tree : trees) {
                int n = int(tree.tokens.size());
                if (n < config.build.min_sent_len || n > config.build.max_sent_len) continue;
                for (auto& [rendering, count] : extract_catenae(tree, config.build.max_catena_len, mode))
                    counts[rendering] += count;
            }
            std::vector<std::pair<std::string, uint64_t>> rows(counts.begin(), counts.end());
            std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
            });
            std::ostringstream out;
            for (const auto& [rendering, count] : rows) out << rendering << '\t' << count << '\n';
            write_text_file(extract_out, out.str());
            std::cout << rows.size() << " distinct renderings\n";
        } else if (*cmd_rank) {
            auto trees = load_trees(rank_conllu);
            auto constructicon = build_constructicon(trees, config);
            std::ofstream out(rank_out, std::ios::binary);
            if (!out) raise(Err::IoError, "cannot write " + rank_out.string());
            constructicon.dump_tsv(out);
            std::cout << constructicon.size() << " renderings\n";
        } else if (*cmd_compare) {
            std::vector<Constructicon> inventories;
            for (const fs::path& path : compare_inputs)
                inventories.push_back(load_constructicon(path));
            if (inventories.size() == 2) {
                auto report = Constructicon::compare(inventories[0], inventories[1],
                                                     config.top_k, config.rank_by);
                json j;
                j["spearman_rho"] = report.spearman_rho;
                j["jaccard"] = report.jaccard;
                j["k"] = report.k;
                j["overlap_size"] = report.overlap_size;
                std::cout << j.dump(2) << "\n";
            }
            if (!compare_matrix.empty()) {
                std::ostringstream out;
                out << "name";
                for (const fs::path& path : compare_inputs) out << '\t' << path.stem().string();
                out << '\n';
                for (size_t i = 0; i < inventories.size(); ++i) {
                    out << compare_inputs[i].stem().string();
                    for (size_t j2 = 0; j2 < inventories.size(); ++j2) {
                        double rho = 1.0;
                        if (i != j2)
                            rho = Constructicon::compare(inventories[i], inventories[j2],
                                                         config.top_k, config.rank_by)
                                      .spearman_rho;
                        char buf[32];
                        std::snprintf(buf, sizeof(buf), "%.6g", rho);
                        out << '\t' << buf;
                    }
                    out << '\n';
                }
                write_text_file(compare_matrix, out.str());
            }
        } else if (*cmd_space) {
            auto trees = load_trees(space_conllu);
            auto constructicon = load_constructicon(space_targets_from);
            auto targets = select_targets(constructicon, config.num_targets,
                                          config.pairs.min_arity, config.pairs.max_arity);
            auto contexts = select_targets(constructicon, config.num_contexts,
                                           config.pairs.min_arity, config.pairs.max_arity);
            auto space = build_space(trees, targets, contexts, config);
            space.save(space_out);
            if (!space_tsv.empty()) {
                std::ofstream out(space_tsv, std::ios::binary);
                space.export_tsv(out);
            }
            std::cout << space.targets.size() << " targets, " << space.dim() << " dimensions\n";
        } else if (*cmd_pairs) {
            auto trees = load_trees(pairs_conllu);
            auto constructicon = load_constructicon(pairs_constructicon);
            auto pairs = extract_minimal_pairs(trees, constructicon, config.pairs);
            std::ostringstream out;
            out << "cat1\tcat2\twitnesses\n";
            for (const MinimalPair& p : pairs)
                out << p.cat1 << '\t' << p.cat2 << '\t' << p.witness_count << '\n';
            write_text_file(pairs_out, out.str());
            std::cout << pairs.size() << " minimal pairs\n";
        } else if (*cmd_shift) {
            std::vector<MinimalPair> pairs;
            {
                std::ifstream in(shift_pairs);
                if (!in) raise(Err::IoError, "cannot open " + shift_pairs.string());
                std::string line;
                std::getline(in, line);  // header
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    size_t t1 = line.find('\t');
                    size_t t2 = line.find('\t', t1 + 1);
                    require(t1 != std::string::npos && t2 != std::string::npos,
                            Err::MalformedLine, "pairs TSV needs 3 columns");
                    pairs.push_back({line.substr(0, t1), line.substr(t1 + 1, t2 - t1 - 1),
                                     std::strtoull(line.c_str() + t2 + 1, nullptr, 10)});
                }
            }
            auto input_space = EmbeddingSpace::load(shift_input_space);
            auto best_space = EmbeddingSpace::load(shift_best_space);
            std::vector<EmbeddingSpace> stage_spaces;
            for (const fs::path& path : shift_stage_spaces)
                stage_spaces.push_back(EmbeddingSpace::load(path));
            auto records = compute_shifts(pairs, input_space, best_space, stage_spaces, &std::cerr);
            std::ostringstream out;
            write_shifts_tsv(out, records);
            write_text_file(shift_out, out.str());
            std::cout << records.size() << " shift records\n";
        } else if (*cmd_test) {
            std::ifstream in(test_shifts);
            if (!in) raise(Err::IoError, "cannot open " + test_shifts.string());
            auto records = read_shifts_tsv(in);
            auto groups = group_averages(records, config.group_by);
            if (!test_groups.empty()) {
                std::ostringstream out;
                write_groups_tsv(out, groups);
                write_text_file(test_groups, out.str());
            }
            auto report = bin_and_test(groups, config.bin_low, config.bin_high);
            write_text_file(test_report, report.to_json_string() + "\n");
            std::cout << "H " << report.h << " p " << report.p << "\n";
        } else if (*cmd_run) {
            if (!run_annotator_flag.empty()) config.annotator = run_annotator_flag;
            return run_all.execute(cli);
        } else if (*cmd_verify) {
            RunManifest::verify(verify_dir);
            std::cout << "all artifacts match the manifest\n";
        }
    } catch (const CatlmError& e) {
        json j;
        j["error"] = err_name(e.code());
        j["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        json j;
        j["error"] = "Unexpected";
        j["message"] = e.what();
        std::cerr << j.dump() << "\n";
        return 1;
    }
    return 0;
}

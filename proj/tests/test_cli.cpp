#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef CATLM_BIN
#define CATLM_BIN "catlm"
#endif
#ifndef TOYGEN_BIN
#define TOYGEN_BIN "toygen"
#endif
#ifndef TOYPARSE_BIN
#define TOYPARSE_BIN "toyparse"
#endif

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

CliResult run_cli(const std::string& command) {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() / "catlm_cli_io";
    fs::create_directories(dir);
    fs::path out = dir / ("out" + std::to_string(counter));
    fs::path err = dir / ("err" + std::to_string(counter));
    ++counter;
    std::string full = command + " > \"" + out.string() + "\" 2> \"" + err.string() + "\"";
    int rc = std::system(full.c_str());
    CliResult result;
    result.exit_code = (rc == -1) ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : -2);
    result.out = slurp(out);
    result.err = slurp(err);
    return result;
}

fs::path sandbox() {
    fs::path dir = fs::temp_directory_path() / "catlm_cli_test";
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("split writes three deterministic files") {
    fs::path dir = sandbox();
    std::string corpus;
    for (int i = 0; i < 20; ++i) corpus += "line number " + std::to_string(i) + "\n";
    write_file(dir / "c.txt", corpus);
    auto r = run_cli(std::string(CATLM_BIN) + " split --input " + (dir / "c.txt").string() +
                     " --out-prefix " + (dir / "c").string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "c.train"));
    CHECK(fs::exists(dir / "c.valid"));
    CHECK(fs::exists(dir / "c.test"));
    std::string train1 = slurp(dir / "c.train");
    auto r2 = run_cli(std::string(CATLM_BIN) + " split --input " + (dir / "c.txt").string() +
                      " --out-prefix " + (dir / "c").string());
    CHECK(r2.exit_code == 0);
    CHECK(slurp(dir / "c.train") == train1);
}

TEST_CASE("stats emits parseable json") {
    fs::path dir = sandbox();
    write_file(dir / "s.txt", "ab\nabcd\n");
    auto r = run_cli(std::string(CATLM_BIN) + " stats --input " + (dir / "s.txt").string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("\"mean_len\": 3.0") != std::string::npos);
    CHECK(r.out.find("\"std_len\": 1.0") != std::string::npos);
}

TEST_CASE("missing input gives a machine-readable error and exit code") {
    auto r = run_cli(std::string(CATLM_BIN) + " stats --input /nonexistent/corpus.txt");
    CHECK(r.exit_code == 3);  // IoError
    CHECK(r.err.find("{\"error\":\"IoError\"") != std::string::npos);
}

TEST_CASE("empty corpus maps to its own exit code") {
    fs::path dir = sandbox();
    write_file(dir / "empty.txt", "\n\n");
    auto r = run_cli(std::string(CATLM_BIN) + " stats --input " + (dir / "empty.txt").string());
    CHECK(r.exit_code == 4);  // EmptyCorpus
    CHECK(r.err.find("EmptyCorpus") != std::string::npos);
}

TEST_CASE("bad config key rejected") {
    fs::path dir = sandbox();
    write_file(dir / "bad.cfg", "[charlm]\nnonsense = 3\n");
    write_file(dir / "x.txt", "a b\n");
    auto r = run_cli(std::string(CATLM_BIN) + " --config " + (dir / "bad.cfg").string() +
                     " stats --input " + (dir / "x.txt").string());
    CHECK(r.exit_code == 2);  // ConfigError
    CHECK(r.err.find("unknown config key") != std::string::npos);
}

TEST_CASE("toygen, toyparse, extract, rank and compare chain") {
    fs::path dir = sandbox();
    auto gen = run_cli(std::string(TOYGEN_BIN) + " --tokens 2000 --seed 5 --out " +
                       (dir / "toy.txt").string());
    REQUIRE(gen.exit_code == 0);
    auto parse = run_cli(std::string(TOYPARSE_BIN) + " " + (dir / "toy.txt").string() + " " +
                         (dir / "toy.conllu").string());
    REQUIRE(parse.exit_code == 0);

    auto extract = run_cli(std::string(CATLM_BIN) + " extract --conllu " +
                           (dir / "toy.conllu").string() + " --out " +
                           (dir / "catenae.tsv").string());
    CHECK(extract.exit_code == 0);
    std::string catenae = slurp(dir / "catenae.tsv");
    CHECK(catenae.find('\t') != std::string::npos);

    auto rank = run_cli(std::string(CATLM_BIN) +
                        " --set constructicon.min_freq=2 rank --conllu " +
                        (dir / "toy.conllu").string() + " --out " + (dir / "inv.tsv").string());
    CHECK(rank.exit_code == 0);

    // identity comparison: rho and jaccard exactly 1
    auto compare = run_cli(std::string(CATLM_BIN) + " compare --inputs " +
                           (dir / "inv.tsv").string() + " " + (dir / "inv.tsv").string());
    CHECK(compare.exit_code == 0);
    CHECK(compare.out.find("\"spearman_rho\": 1.0") != std::string::npos);
    CHECK(compare.out.find("\"jaccard\": 1.0") != std::string::npos);
}

TEST_CASE("annotate subcommand runs the fixture annotator") {
    fs::path dir = sandbox();
    write_file(dir / "raw.txt", "the cat sleeps .\n");
    auto r = run_cli(std::string(CATLM_BIN) + " annotate --input " + (dir / "raw.txt").string() +
                     " --out " + (dir / "raw.conllu").string() + " --command '" + TOYPARSE_BIN +
                     " {input} {output}'");
    CHECK(r.exit_code == 0);
    CHECK(slurp(dir / "raw.conllu").find("\tDET\t") != std::string::npos);

    auto fail = run_cli(std::string(CATLM_BIN) + " annotate --input " +
                        (dir / "raw.txt").string() + " --out " + (dir / "x.conllu").string() +
                        " --command 'cat {input} > /dev/null; echo no > /dev/null; false # {output}'");
    CHECK(fail.exit_code == 8);  // AnnotatorFailed
}

TEST_CASE("train twice gives byte-identical checkpoints") {
    fs::path dir = sandbox();
    std::string corpus;
    for (int i = 0; i < 40; ++i) corpus += "the cat sat on the mat .\n";
    write_file(dir / "lm.txt", corpus);
    std::string config =
        "[charlm]\nhidden_size = 8\nnum_layers = 1\nembedding_size = 4\nbptt_len = 16\n"
        "batch_size = 2\nepochs = 2\nsnapshot_every = 1\nseed = 3\n";
    write_file(dir / "lm.cfg", config);
    std::string base = std::string(CATLM_BIN) + " --config " + (dir / "lm.cfg").string() +
                       " train --input " + (dir / "lm.txt").string() + " --out-dir ";
    auto r1 = run_cli(base + (dir / "ck1").string());
    auto r2 = run_cli(base + (dir / "ck2").string());
    REQUIRE(r1.exit_code == 0);
    REQUIRE(r2.exit_code == 0);
    for (const char* name : {"epoch_001.clmb", "epoch_002.clmb", "best.clmb"}) {
        CHECK(fs::exists(dir / "ck1" / name));
        CHECK(slurp(dir / "ck1" / name) == slurp(dir / "ck2" / name));
    }
}

TEST_CASE("babble from a trained checkpoint") {
    fs::path dir = sandbox();
    CHECK(fs::exists(dir / "ck1" / "best.clmb"));  // from the previous case
    auto r = run_cli(std::string(CATLM_BIN) + " babble --checkpoint " +
                     (dir / "ck1" / "best.clmb").string() + " --stats-from " +
                     (dir / "lm.txt").string() + " --target-tokens 50 --out " +
                     (dir / "babble.txt").string());
    CHECK(r.exit_code == 0);
    CHECK(!slurp(dir / "babble.txt").empty());
}

TEST_CASE("CATLM_SEED environment variable overrides the global seed") {
    fs::path dir = sandbox();
    std::string corpus;
    for (int i = 0; i < 30; ++i) corpus += "row " + std::to_string(i) + "\n";
    write_file(dir / "env.txt", corpus);
    std::string cmd = std::string(CATLM_BIN) + " split --input " + (dir / "env.txt").string() +
                      " --out-prefix " + (dir / "env").string();
    run_cli("CATLM_SEED=1 " + cmd);
    std::string train_seed1 = slurp(dir / "env.train");
    run_cli("CATLM_SEED=2 " + cmd);
    std::string train_seed2 = slurp(dir / "env.train");
    run_cli("CATLM_SEED=1 " + cmd);
    CHECK(slurp(dir / "env.train") == train_seed1);
    CHECK(train_seed1 != train_seed2);
}

}  // TEST_SUITE

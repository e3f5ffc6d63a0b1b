// Emits the bundled synthetic demo corpus: one sentence per line, sampled
// from the toy grammar until the requested token count is reached.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "catlm/error.hpp"
#include "catlm/toytext.hpp"

int main(int argc, char** argv) {
    CLI::App app{"toygen - generate the bundled synthetic corpus"};
    uint64_t tokens = 50000;
    uint64_t seed = 1;
    std::string out_path;
    app.add_option("--tokens", tokens, "Minimum number of whitespace tokens");
    app.add_option("--seed", seed, "Generator seed");
    app.add_option("--out", out_path, "Output file (stdout if omitted)");
    CLI11_PARSE(app, argc, argv);

    try {
        catlm::toytext::GenConfig config;
        config.seed = seed;
        config.target_tokens = tokens;
        auto sentences = catlm::toytext::generate(config);
        if (out_path.empty()) {
            for (const auto& s : sentences) std::cout << s << '\n';
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) {
                std::cerr << "cannot write " << out_path << "\n";
                return 3;
            }
            for (const auto& s : sentences) out << s << '\n';
        }
    } catch (const catlm::CatlmError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    return 0;
}

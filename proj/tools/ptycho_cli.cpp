#include "ptycho/app.hpp"
#include "ptycho/io.hpp"
#include "ptycho/parallel.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace ptycho;

namespace {

struct NullBuffer : std::streambuf {
    int overflow(int c) override { return c; }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Blind ptychography with parasitic background: simulate, reconstruct, evaluate"};
    app.require_subcommand(1);

    std::string config_path, algo, out_dir, data_dir, recon_dir, truth_dir;
    std::uint64_t seed = 0;
    int max_iters = 0;
    bool quiet = false;
    std::size_t margin = 0;
    long max_shift = -1;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run config");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--seed", seed, "override the config seed");
        sub->add_flag("--quiet", quiet, "suppress progress output");
    };

    auto* sim = app.add_subcommand("simulate", "generate a synthetic data set");
    common(sim);

    auto* rec = app.add_subcommand("reconstruct", "run a solver on a simulated data set");
    common(rec);
    rec->add_option("--algo", algo, "adp, adpr or baseline")->check(CLI::IsMember({"adp", "adpr", "baseline"}));
    rec->add_option("--max-iters", max_iters, "override solver.max_iters")->check(CLI::PositiveNumber);
    rec->add_option("--data", data_dir, "simulate output directory (default: io.data_dir)");

    auto* eval = app.add_subcommand("evaluate", "SNR and R-factor of a reconstruction");
    eval->add_option("--recon", recon_dir, "reconstruct output directory")->required();
    eval->add_option("--truth", truth_dir, "simulate output directory holding object_true.ptya");
    eval->add_option("--data", data_dir, "simulate output directory holding frames for the R-factor");
    eval->add_option("--margin", margin, "pixels cropped from each object edge before SNR");
    eval->add_option("--max-shift", max_shift, "alignment search radius in pixels (default 16)");
    eval->add_flag("--quiet", quiet, "suppress printed report");

    CLI11_PARSE(app, argc, argv);

    NullBuffer null_buf;
    std::ostream null_stream(&null_buf);
    std::ostream& log = quiet ? null_stream : std::cout;

    try {
        const int threads = configure_threads();
        if (*eval) {
            std::optional<fs::path> truth, data;
            if (!truth_dir.empty()) truth = truth_dir;
            if (!data_dir.empty()) data = data_dir;
            cmd_evaluate(recon_dir, truth, data, margin, max_shift < 0 ? 16 : max_shift, log);
            return 0;
        }

        RunConfig cfg;
        if (!config_path.empty())
            cfg = load_config(config_path);
        else if (*rec && !data_dir.empty() && fs::exists(fs::path(data_dir) / "config.json"))
            cfg = load_config(fs::path(data_dir) / "config.json");
        if (sim->count("--seed") || rec->count("--seed")) cfg.seed = seed;
        if (!algo.empty()) cfg.algo = algo;
        if (max_iters > 0) cfg.solver.max_iters = max_iters;
        cfg.probe.side = cfg.geometry.frame_side;
        cfg.validate();
        if (out_dir.empty()) throw std::invalid_argument("--out is required");
        log << "threads " << threads << "\n";

        if (*sim) {
            cmd_simulate(cfg, out_dir, log);
        } else {
            if (data_dir.empty()) data_dir = cfg.io.data_dir;
            if (data_dir.empty()) throw std::invalid_argument("no data set: pass --data or set io.data_dir");
            cmd_reconstruct(cfg, data_dir, out_dir, log);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

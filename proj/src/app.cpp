#include "ptycho/app.hpp"

#include "ptycho/adp.hpp"
#include "ptycho/baseline.hpp"
#include "ptycho/io.hpp"
#include "ptycho/metrics.hpp"
#include "ptycho/phantom.hpp"
#include "ptycho/tv.hpp"

#include <cmath>
#include <sstream>

#ifndef PTYCHO_VERSION
#define PTYCHO_VERSION "unknown"
#endif

namespace ptycho {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

Dataset build_dataset(const RunConfig& cfg)
{
    cfg.validate();
    Dataset d;
    d.geometry = raster_scan(cfg.geometry.object, cfg.geometry.frame_side, cfg.geometry.step);
    d.object_true = make_phantom(cfg.geometry.object, cfg.seed);
    ProbeSpec ps = cfg.probe;
    ps.side = cfg.geometry.frame_side;
    d.probe_true = make_probe(ps);

    const Shape fshape = d.geometry.frame_shape();
    if (cfg.noise.background_peak > 0.0) {
        const FrameStack exact = intensities(forward(d.probe_true, d.object_true, d.geometry), RealField2D(fshape));
        d.background_true = make_background(ps.side, cfg.noise.background_peak * exact.mean_intensity());
    } else {
        d.background_true = RealField2D(fshape);
    }

    NoiseConfig nc;
    nc.poisson = cfg.noise.poisson;
    nc.gaussian = cfg.noise.gaussian;
    nc.gaussian_sigma2 = cfg.noise.gaussian_sigma2;
    nc.gaussian_relative_variance = cfg.noise.gaussian_relative_variance;
    nc.background = d.background_true;
    nc.outliers = cfg.noise.outliers;
    nc.outlier_frame_fraction = cfg.noise.outlier_frame_fraction;
    nc.outlier_patch_fraction = cfg.noise.outlier_patch_fraction;
    nc.seed = cfg.seed;
    d.raw = simulate(d.probe_true, d.object_true, d.geometry, nc, &d.log);
    d.shifted = shift_poisson(d.raw, d.raw.sigma2);
    return d;
}

SolverConfig solver_config(const RunConfig& cfg)
{
    SolverConfig s = cfg.solver;
    if (cfg.lens_constraint) s.lens_mask = make_lens_mask(cfg.geometry.frame_side, cfg.probe.lens_radius);
    return s;
}

Reconstruction reconstruct(const RunConfig& cfg, const FrameStack& stack, const ScanGeometry& g)
{
    const SolverConfig s = solver_config(cfg);
    if (cfg.algo == "adp") return run_adp(stack, g, s);
    if (cfg.algo == "adpr") return run_adpr(stack, g, s);
    if (cfg.algo == "baseline") return run_baseline(stack, g, s);
    throw std::invalid_argument("unknown algo '" + cfg.algo + "'");
}

std::string flop_estimate(std::size_t frames, Shape frame_shape)
{
    const double mbar = static_cast<double>(frame_shape.rows * frame_shape.cols);
    const double m = static_cast<double>(frames) * mbar;
    const double fft = 5.0 * mbar * std::log2(mbar);
    const double total = 63.0 * m + 2.0 * static_cast<double>(frames) * fft;
    std::ostringstream ss;
    ss.precision(3);
    ss << "per-iteration cost ~ 63m + 2J*FFT = " << total << " flop (m = " << m << ", J = " << frames
       << ", FFT ~ 5 n log2 n = " << fft << ")";
    return ss.str();
}

void write_geometry(const fs::path& path, const ScanGeometry& g)
{
    ojson j;
    j["object_size"] = {g.object_shape().rows, g.object_shape().cols};
    j["frame_side"] = g.frame_side();
    ojson pos = ojson::array();
    for (const auto& p : g.positions()) pos.push_back({p.row, p.col});
    j["positions"] = pos;
    write_text(path, j.dump(1) + "\n");
}

ScanGeometry read_geometry(const fs::path& path)
{
    const auto j = nlohmann::json::parse(read_text(path));
    std::vector<ScanPosition> pos;
    for (const auto& p : j.at("positions")) pos.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()});
    const Shape os{j.at("object_size").at(0).get<std::size_t>(), j.at("object_size").at(1).get<std::size_t>()};
    return ScanGeometry(std::move(pos), j.at("frame_side").get<std::size_t>(), os);
}

void cmd_simulate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log)
{
    fs::create_directories(out_dir);
    const Dataset d = build_dataset(cfg);
    write_field(out_dir / "probe_true.ptya", d.probe_true);
    write_field(out_dir / "object_true.ptya", d.object_true);
    write_field(out_dir / "background_true.ptya", d.background_true);
    write_geometry(out_dir / "geometry.json", d.geometry);
    write_stack(out_dir / "frames_raw.ptya", d.raw.frames);
    write_stack(out_dir / "frames.ptya", d.shifted.frames);
    write_text(out_dir / "config.json", to_json(cfg).dump(2) + "\n");

    ojson m;
    m["version"] = PTYCHO_VERSION;
    m["seed"] = cfg.seed;
    m["rng"] = d.log.rng;
    m["noise"] = to_json(cfg)["noise"];
    m["sigma2"] = d.log.sigma2;
    m["mean_intensity"] = d.raw.mean_intensity();
    m["frames"] = d.geometry.num_frames();
    m["corrupted_frames"] = d.log.corrupted_frames;
    ojson patches = ojson::array();
    for (const auto& p : d.log.patches) patches.push_back({{"row", p[0]}, {"col", p[1]}, {"side", p[2]}});
    m["outlier_patches"] = patches;
    write_text(out_dir / "manifest.json", m.dump(2) + "\n");
    log << "simulated " << d.geometry.num_frames() << " frames of " << to_string(d.geometry.frame_shape())
        << " over a " << to_string(d.geometry.object_shape()) << " object -> " << out_dir.string() << "\n";
}

void cmd_reconstruct(const RunConfig& cfg, const fs::path& data_dir, const fs::path& out_dir, std::ostream& log)
{
    const ScanGeometry g = read_geometry(data_dir / "geometry.json");
    FrameStack stack;
    stack.frames = read_stack(data_dir / "frames.ptya");
    stack.shifted = true;
    stack.check_against(g);
    const std::size_t clamped = clamp_negative(stack);
    fs::create_directories(out_dir);

    log << "algo " << cfg.algo << ", " << g.num_frames() << " frames\n";
    log << flop_estimate(g.num_frames(), g.frame_shape()) << "\n";
    if (clamped) log << "clamped " << clamped << " negative intensities to 0\n";

    const SolverConfig scfg = solver_config(cfg);
    const ResolvedConfig rc = resolve(scfg, stack);
    Reconstruction rec = reconstruct(cfg, stack, g);
    if (!cfg.io.record_elapsed)
        for (auto& h : rec.history) h.elapsed_ms = 0.0;

    write_field(out_dir / "object.ptya", rec.u);
    write_field(out_dir / "probe.ptya", rec.omega);
    write_field(out_dir / "background.ptya", rec.phi);
    write_history_csv(out_dir / "history.csv", rec.history);
    if (cfg.algo == "baseline") {
        write_field(out_dir / "eta.ptya", rec.eta);
        std::ostringstream ss;
        ss << "iter,eta_mean\n";
        for (std::size_t i = 0; i < rec.eta_mean_history.size(); ++i)
            ss << i << ',' << format_double(rec.eta_mean_history[i]) << '\n';
        write_text(out_dir / "eta_trace.csv", ss.str());
    }
    if (cfg.io.export_images) {
        export_amplitude(out_dir / "object_amplitude.pgm", rec.u);
        export_phase(out_dir / "object_phase.pgm", rec.u);
        export_amplitude(out_dir / "probe_amplitude.pgm", rec.omega);
        export_phase(out_dir / "probe_phase.pgm", rec.omega);
    }

    ojson h;
    h["version"] = PTYCHO_VERSION;
    h["algo"] = cfg.algo;
    if (cfg.algo == "baseline")
        h["host_loop"] = "ADP iteration with background amplitude frozen at 0; eta/phi refreshed after each (z) step";
    h["data_dir"] = fs::absolute(data_dir).lexically_normal().string();
    h["config"] = to_json(cfg);
    h["resolved"] = {{"alpha1", rc.alpha1},
                     {"alpha2", rc.alpha2},
                     {"lambda", rc.lambda},
                     {"beta", rc.beta},
                     {"residual_floor", rc.residual_floor}};
    h["clamped_pixels"] = clamped;
    h["iterations"] = rec.iterations;
    h["flop_estimate"] = flop_estimate(g.num_frames(), g.frame_shape());
    write_text(out_dir / "run_header.json", h.dump(2) + "\n");

    if (!rec.history.empty()) {
        const auto& last = rec.history.back();
        log << "finished after " << rec.iterations << " iterations, R-factor " << format_double(last.r_factor)
            << "\n";
    }
}

EvaluationReport cmd_evaluate(const fs::path& recon_dir, const std::optional<fs::path>& truth_dir,
                              const std::optional<fs::path>& data_dir, std::size_t margin, long max_shift,
                              std::ostream& out)
{
    const ComplexField2D u = read_complex_field(recon_dir / "object.ptya");
    EvaluationReport rep;
    ojson j;
    if (truth_dir) {
        const ComplexField2D truth = read_complex_field(*truth_dir / "object_true.ptya");
        if (truth.shape() != u.shape())
            throw ShapeError("evaluate: reconstruction " + to_string(u.shape()) + " vs truth " +
                             to_string(truth.shape()));
        rep.snr_db = snr(crop_margin(u, margin), crop_margin(truth, margin), max_shift);
        j["snr_db"] = format_double(*rep.snr_db);
        j["snr_margin"] = margin;
        j["snr_max_shift"] = max_shift;
    }
    if (data_dir) {
        const ScanGeometry g = read_geometry(*data_dir / "geometry.json");
        FrameStack stack;
        stack.frames = read_stack(*data_dir / "frames.ptya");
        stack.shifted = true;
        clamp_negative(stack);
        const ComplexField2D probe = read_complex_field(recon_dir / "probe.ptya");
        RealField2D amp = read_real_field(recon_dir / "background.ptya");
        for (double& v : amp) v = std::sqrt(std::max(0.0, v));
        rep.r_factor = r_factor(probe, u, amp, stack, g);
        j["r_factor"] = format_double(*rep.r_factor);
    }
    if (rep.snr_db) out << "snr_db " << format_double(*rep.snr_db) << "\n";
    if (rep.r_factor) out << "r_factor " << format_double(*rep.r_factor) << "\n";
    write_text(recon_dir / "evaluation.json", j.dump(2) + "\n");
    return rep;
}

}  // namespace ptycho

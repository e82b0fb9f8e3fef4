#include "ptycho/config.hpp"

#include "ptycho/io.hpp"

#include <map>
#include <set>

namespace ptycho {

using nlohmann::json;

namespace {

// Maps JSON pointer paths ("/solver/r") to the line where the key appears.
std::map<std::string, std::size_t> key_lines(const std::string& text)
{
    struct Frame {
        bool object;
        std::string path;
        std::string key;
        std::size_t index = 0;
    };
    std::map<std::string, std::size_t> lines;
    std::vector<Frame> stack;
    std::size_t line = 1;
    bool expect_key = false;

    auto child_path = [&]() {
        if (stack.empty()) return std::string();
        const Frame& f = stack.back();
        return f.path + "/" + (f.object ? f.key : std::to_string(f.index));
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '\n') {
            ++line;
        } else if (c == '"') {
            std::string s;
            for (++i; i < text.size() && text[i] != '"'; ++i) {
                if (text[i] == '\\' && i + 1 < text.size()) ++i;
                if (text[i] == '\n') ++line;
                s += text[i];
            }
            if (!stack.empty() && stack.back().object && expect_key) {
                stack.back().key = s;
                lines.emplace(stack.back().path + "/" + s, line);
                expect_key = false;
            }
        } else if (c == '{' || c == '[') {
            const std::string p = child_path();
            stack.push_back({c == '{', p, {}, 0});
            expect_key = c == '{';
        } else if (c == '}' || c == ']') {
            if (!stack.empty()) stack.pop_back();
        } else if (c == ',') {
            if (!stack.empty()) {
                if (stack.back().object)
                    expect_key = true;
                else
                    ++stack.back().index;
            }
        }
    }
    return lines;
}

class Reader {
public:
    Reader(const json& obj, std::string path, const std::map<std::string, std::size_t>& lines,
           const std::string& source)
        : obj_(obj), path_(std::move(path)), lines_(lines), source_(source)
    {
        if (!obj_.is_object()) fail(path_, "expected an object");
    }

    [[noreturn]] void fail(const std::string& ptr, const std::string& what) const
    {
        auto it = lines_.find(ptr);
        throw ConfigError(source_, it == lines_.end() ? 0 : it->second, display(ptr) + ": " + what);
    }

    template <class T>
    void read(const std::string& key, T& out)
    {
        known_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        out = convert<T>(*it, path_ + "/" + key);
    }

    template <class T>
    void read(const std::string& key, std::optional<T>& out)
    {
        known_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        if (it->is_null())
            out.reset();
        else
            out = convert<T>(*it, path_ + "/" + key);
    }

    Reader child(const std::string& key)
    {
        known_.insert(key);
        static const json empty = json::object();
        auto it = obj_.find(key);
        return Reader(it == obj_.end() ? empty : *it, path_ + "/" + key, lines_, source_);
    }

    void mark(const std::string& key) { known_.insert(key); }
    bool has(const std::string& key) const { return obj_.contains(key); }
    std::string ptr(const std::string& key) const { return path_ + "/" + key; }

    void finish() const
    {
        for (auto it = obj_.begin(); it != obj_.end(); ++it)
            if (!known_.count(it.key())) fail(path_ + "/" + it.key(), "unknown key");
    }

private:
    static std::string display(const std::string& ptr)
    {
        std::string s = ptr.empty() ? "<root>" : ptr.substr(1);
        for (char& c : s)
            if (c == '/') c = '.';
        return s;
    }

    template <class T>
    T convert(const json& v, const std::string& ptr) const
    {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(ptr, "expected true or false");
            return v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(ptr, "expected a string");
            return v.get<std::string>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) fail(ptr, "expected a number");
            return v.get<T>();
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!v.is_number_unsigned()) fail(ptr, "expected a non-negative integer");
            return v.get<T>();
        } else {
            if (!v.is_number_integer()) fail(ptr, "expected an integer");
            return v.get<T>();
        }
    }

    const json& obj_;
    std::string path_;
    const std::map<std::string, std::size_t>& lines_;
    const std::string& source_;
    std::set<std::string> known_;
};

}  // namespace

void RunConfig::validate() const
{
    auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
    if (algo != "adp" && algo != "adpr" && algo != "baseline") fail("algo must be adp, adpr or baseline");
    if (geometry.object.rows == 0 || geometry.object.cols == 0) fail("geometry.object_size must be positive");
    if (geometry.frame_side == 0) fail("geometry.frame_side must be > 0");
    if (geometry.frame_side > geometry.object.rows || geometry.frame_side > geometry.object.cols)
        fail("geometry.frame_side exceeds the object size");
    if (geometry.step == 0) fail("geometry.step must be > 0");
    if (geometry.step > geometry.frame_side) fail("geometry.step larger than frame_side leaves gaps");
    if (!(probe.fwhm > 0.0)) fail("probe.fwhm must be > 0");
    if (!(probe.photons_per_frame > 0.0)) fail("probe.photons_per_frame must be > 0");
    if (noise.background_peak < 0.0) fail("noise.background_peak must be >= 0");
    if (noise.gaussian_sigma2 && *noise.gaussian_sigma2 < 0.0) fail("noise.gaussian_sigma2 must be >= 0");
    if (noise.outlier_frame_fraction < 0.0 || noise.outlier_frame_fraction > 1.0)
        fail("noise.outlier_frame_fraction must be in [0, 1]");
    if (!(noise.outlier_patch_fraction > 0.0) || noise.outlier_patch_fraction > 1.0)
        fail("noise.outlier_patch_fraction must be in (0, 1]");
    if (lens_constraint && !(probe.lens_radius > 0.0)) fail("solver.lens_constraint needs probe.lens_radius > 0");
    if (io.snr_max_shift < 0) fail("io.snr_max_shift must be >= 0");
    if (2 * io.snr_margin >= std::min(geometry.object.rows, geometry.object.cols))
        fail("io.snr_margin leaves no pixels");
    solver.validate();
}

RunConfig parse_config(const std::string& text, const std::string& source)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte ? e.byte - 1 : 0, text.size()); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError(source, line, std::string("invalid JSON: ") + e.what());
    }
    const auto lines = key_lines(text);

    RunConfig cfg;
    Reader top(root, "", lines, source);
    top.read("algo", cfg.algo);
    top.read("seed", cfg.seed);

    {
        Reader r = top.child("geometry");
        if (r.has("object_size")) {
            const json& v = root["geometry"]["object_size"];
            if (v.is_number_unsigned()) {
                cfg.geometry.object = {v.get<std::size_t>(), v.get<std::size_t>()};
            } else if (v.is_array() && v.size() == 2 && v[0].is_number_unsigned() && v[1].is_number_unsigned()) {
                cfg.geometry.object = {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
            } else {
                r.fail(r.ptr("object_size"), "expected an integer or [rows, cols]");
            }
        }
        r.mark("object_size");
        r.read("frame_side", cfg.geometry.frame_side);
        r.read("step", cfg.geometry.step);
        r.finish();
    }
    {
        Reader r = top.child("probe");
        r.read("fwhm", cfg.probe.fwhm);
        r.read("curvature", cfg.probe.curvature);
        r.read("lens_radius", cfg.probe.lens_radius);
        r.read("photons_per_frame", cfg.probe.photons_per_frame);
        r.finish();
    }
    {
        Reader r = top.child("noise");
        auto& n = cfg.noise;
        r.read("poisson", n.poisson);
        r.read("gaussian", n.gaussian);
        r.read("gaussian_sigma2", n.gaussian_sigma2);
        r.read("gaussian_relative_variance", n.gaussian_relative_variance);
        r.read("background_peak", n.background_peak);
        r.read("outliers", n.outliers);
        r.read("outlier_frame_fraction", n.outlier_frame_fraction);
        r.read("outlier_patch_fraction", n.outlier_patch_fraction);
        r.finish();
    }
    {
        Reader r = top.child("solver");
        auto& s = cfg.solver;
        r.read("r", s.r);
        r.read("alpha1", s.alpha1);
        r.read("alpha2", s.alpha2);
        r.read("epsilon", s.epsilon);
        r.read("gamma", s.gamma);
        r.read("tau", s.tau);
        r.read("inner_iters", s.inner_iters);
        r.read("warm_start_iter", s.warm_start_iter);
        r.read("max_iters", s.max_iters);
        r.read("tol", s.tol);
        r.read("weights_enabled", s.weights_enabled);
        r.read("background_enabled", s.background_enabled);
        r.read("lens_constraint", cfg.lens_constraint);
        r.read("lambda", s.lambda);
        r.read("beta", s.beta);
        r.read("cg_iters", s.cg_iters);
        r.read("weight_cap", s.weight_cap);
        r.read("residual_floor_rel", s.residual_floor_rel);
        r.read("eta_floor", s.eta_floor);
        r.finish();
    }
    {
        Reader r = top.child("io");
        r.read("data_dir", cfg.io.data_dir);
        r.read("export_images", cfg.io.export_images);
        r.read("record_elapsed", cfg.io.record_elapsed);
        r.read("snr_max_shift", cfg.io.snr_max_shift);
        r.read("snr_margin", cfg.io.snr_margin);
        r.finish();
    }
    top.finish();

    cfg.probe.side = cfg.geometry.frame_side;
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source, 0, e.what());
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    return parse_config(read_text(path), path.string());
}

nlohmann::ordered_json to_json(const RunConfig& cfg)
{
    using oj = nlohmann::ordered_json;
    auto opt = [](const std::optional<double>& v) { return v ? oj(*v) : oj(nullptr); };
    oj j;
    j["algo"] = cfg.algo;
    j["seed"] = cfg.seed;
    j["geometry"] = {{"object_size", {cfg.geometry.object.rows, cfg.geometry.object.cols}},
                     {"frame_side", cfg.geometry.frame_side},
                     {"step", cfg.geometry.step}};
    j["probe"] = {{"fwhm", cfg.probe.fwhm},
                  {"curvature", cfg.probe.curvature},
                  {"lens_radius", cfg.probe.lens_radius},
                  {"photons_per_frame", cfg.probe.photons_per_frame}};
    const auto& n = cfg.noise;
    j["noise"] = {{"poisson", n.poisson},
                  {"gaussian", n.gaussian},
                  {"gaussian_sigma2", opt(n.gaussian_sigma2)},
                  {"gaussian_relative_variance", n.gaussian_relative_variance},
                  {"background_peak", n.background_peak},
                  {"outliers", n.outliers},
                  {"outlier_frame_fraction", n.outlier_frame_fraction},
                  {"outlier_patch_fraction", n.outlier_patch_fraction}};
    const auto& s = cfg.solver;
    j["solver"] = {{"r", s.r},
                   {"alpha1", opt(s.alpha1)},
                   {"alpha2", opt(s.alpha2)},
                   {"epsilon", s.epsilon},
                   {"gamma", s.gamma},
                   {"tau", opt(s.tau)},
                   {"inner_iters", s.inner_iters},
                   {"warm_start_iter", s.warm_start_iter},
                   {"max_iters", s.max_iters},
                   {"tol", s.tol},
                   {"weights_enabled", s.weights_enabled},
                   {"background_enabled", s.background_enabled},
                   {"lens_constraint", cfg.lens_constraint},
                   {"lambda", opt(s.lambda)},
                   {"beta", opt(s.beta)},
                   {"cg_iters", s.cg_iters},
                   {"weight_cap", s.weight_cap},
                   {"residual_floor_rel", s.residual_floor_rel},
                   {"eta_floor", s.eta_floor}};
    j["io"] = {{"data_dir", cfg.io.data_dir},
               {"export_images", cfg.io.export_images},
               {"record_elapsed", cfg.io.record_elapsed},
               {"snr_max_shift", cfg.io.snr_max_shift},
               {"snr_margin", cfg.io.snr_margin}};
    return j;
}

}  // namespace ptycho

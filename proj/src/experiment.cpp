#include "vrc/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "vrc/datasets.hpp"
#include "vrc/error.hpp"
#include "vrc/metrics.hpp"

namespace vrc::experiment {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) { throw ConfigError(path + ": " + why); }

const Json& require(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) bad(path + "." + key, "missing required field");
    return j.at(key);
}

template <typename T>
T get(const Json& j, const char* key, const std::string& path) {
    try {
        return require(j, key, path).get<T>();
    } catch (const Json::exception&) {
        bad(path + "." + key, "wrong type");
    }
}

template <typename T>
void get_opt(const Json& j, const char* key, T& out, const std::string& path) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return;
    try {
        out = j.at(key).get<T>();
    } catch (const Json::exception&) {
        bad(path + "." + key, "wrong type");
    }
}

DatasetConfig parse_dataset(const Json& j) {
    const std::string path = "dataset";
    if (!j.is_object()) bad(path, "expected an object");
    DatasetConfig d;
    d.kind = get<std::string>(j, "kind", path);
    d.n_train = get<Index>(j, "n_train", path);
    if (d.kind == "lorenz") {
        get_opt(j, "dt", d.dt, path);
        get_opt(j, "n_points", d.n_points, path);
        get_opt(j, "initial", d.initial, path);
        if (!(d.dt > 0.0)) bad(path + ".dt", "must be positive");
        if (d.n_points < 2) bad(path + ".n_points", "must be at least 2");
        if (d.initial.size() != 3) bad(path + ".initial", "needs three components");
        if (d.n_train <= 1 || d.n_train >= d.n_points) bad(path + ".n_train", "must lie in (1, n_points)");
    } else if (d.kind == "mackey-glass") {
        get_opt(j, "dt_fine", d.dt_fine, path);
        get_opt(j, "delay", d.delay, path);
        get_opt(j, "n_fine", d.n_fine, path);
        get_opt(j, "splice", d.splice, path);
        if (!(d.dt_fine > 0.0)) bad(path + ".dt_fine", "must be positive");
        if (d.splice < 1) bad(path + ".splice", "must be at least 1");
        if (d.n_fine < 2) bad(path + ".n_fine", "must be at least 2");
        const Index n = (d.n_fine + d.splice - 1) / d.splice;
        if (d.n_train <= 1 || d.n_train >= n) bad(path + ".n_train", "must lie in (1, " + std::to_string(n) + ")");
    } else if (d.kind == "bekk") {
        get_opt(j, "d", d.bekk_d, path);
        get_opt(j, "n", d.bekk_n, path);
        if (d.bekk_d < 1) bad(path + ".d", "must be positive");
        if (d.bekk_n < 2) bad(path + ".n", "must be at least 2");
        if (d.n_train <= 1 || d.n_train >= d.bekk_n) bad(path + ".n_train", "must lie in (1, n)");
    } else if (d.kind == "csv") {
        d.path = get<std::string>(j, "path", path);
        get_opt(j, "outputs_path", d.outputs_path, path);
        if (!fs::exists(d.path)) bad(path + ".path", "file not found: " + d.path);
        if (!d.outputs_path.empty() && !fs::exists(d.outputs_path))
            bad(path + ".outputs_path", "file not found: " + d.outputs_path);
    } else {
        bad(path + ".kind", "expected lorenz, mackey-glass, bekk or csv");
    }
    return d;
}

std::optional<cv::Grid> parse_grid(const Json& doc, const estimator::EstimatorSpec& base) {
    if (!doc.contains("grid") || doc.at("grid").is_null()) return std::nullopt;
    const Json& j = doc.at("grid");
    const std::string path = "grid";
    if (!j.is_object()) bad(path, "expected an object");
    cv::Grid g;
    g.base = base;
    get_opt(j, "tau", g.taus, path);
    get_opt(j, "p", g.ps, path);
    get_opt(j, "lambda", g.lambdas, path);
    get_opt(j, "theta", g.thetas, path);
    get_opt(j, "lambda_reg", g.lambda_regs, path);
    for (double r : g.lambda_regs)
        if (!(r > 0.0)) bad(path + ".lambda_reg", "values must be positive");
    for (int t : g.taus)
        if (t < 1) bad(path + ".tau", "values must be >= 1");
    for (int p : g.ps)
        if (p < 1) bad(path + ".p", "values must be >= 1");
    return g;
}

CvConfig parse_cv(const Json& doc) {
    CvConfig c;
    if (!doc.contains("cv") || doc.at("cv").is_null()) return c;
    const Json& j = doc.at("cv");
    const std::string path = "cv";
    const std::string mode = get<std::string>(j, "mode", path);
    if (mode == "overlapping") {
        c.mode = cv::FoldMode::overlapping;
        c.fold_len = get<Index>(j, "fold_len", path);
        c.val_len = get<Index>(j, "val_len", path);
        c.stride = get<Index>(j, "stride", path);
    } else if (mode == "expanding") {
        c.mode = cv::FoldMode::expanding;
        c.k = get<Index>(j, "k", path);
    } else {
        bad(path + ".mode", "expected overlapping or expanding");
    }
    return c;
}

TaskConfig parse_task(const Json& doc) {
    const std::string path = "task";
    const Json& j = require(doc, "task", "config");
    TaskConfig t;
    const std::string mode = get<std::string>(j, "mode", path);
    if (mode == "path-continuation")
        t.mode = forecast::Mode::path_continuation;
    else if (mode == "open-loop")
        t.mode = forecast::Mode::open_loop;
    else
        bad(path + ".mode", "expected path-continuation or open-loop");
    get_opt(j, "lyapunov_exponent", t.lyapunov_exponent, path);
    get_opt(j, "threshold", t.threshold, path);
    get_opt(j, "horizon", t.horizon, path);
    if (t.mode == forecast::Mode::path_continuation && !(t.lyapunov_exponent > 0.0))
        bad(path + ".lyapunov_exponent", "path continuation needs a positive exponent");
    if (!(t.threshold > 0.0)) bad(path + ".threshold", "must be positive");
    if (t.horizon < 0) bad(path + ".horizon", "must be non-negative");
    return t;
}

MetricsConfig parse_metrics(const Json& doc) {
    MetricsConfig m;
    if (!doc.contains("metrics") || doc.at("metrics").is_null()) return m;
    const Json& j = doc.at("metrics");
    const std::string path = "metrics";
    get_opt(j, "nperseg", m.nperseg, path);
    get_opt(j, "overlap", m.overlap, path);
    get_opt(j, "w1_cap", m.w1_cap, path);
    get_opt(j, "mape_eps", m.mape_eps, path);
    double value = 0;
    if (j.contains("f_cut") && !j.at("f_cut").is_null()) {
        get_opt(j, "f_cut", value, path);
        m.f_cut = value;
    }
    if (j.contains("pointwise_lyapunov_times") && !j.at("pointwise_lyapunov_times").is_null()) {
        get_opt(j, "pointwise_lyapunov_times", value, path);
        if (!(value > 0.0)) bad(path + ".pointwise_lyapunov_times", "must be positive");
        m.pointwise_lyapunov_times = value;
    }
    if (m.nperseg < 2) bad(path + ".nperseg", "must be at least 2");
    if (!(m.overlap >= 0.0 && m.overlap < 1.0)) bad(path + ".overlap", "must lie in [0, 1)");
    if (m.w1_cap < 1) bad(path + ".w1_cap", "must be positive");
    if (!(m.mape_eps > 0.0)) bad(path + ".mape_eps", "must be positive");
    return m;
}

}  // namespace

ExperimentConfig parse_config(Json document, std::optional<std::uint64_t> seed_override) {
    if (!document.is_object()) bad("config", "expected a JSON object");
    if (!document.contains("schema") || document.at("schema") != kSchema)
        bad("config.schema", std::string("expected \"") + kSchema + "\"");
    if (seed_override) document["seed"] = *seed_override;
    ExperimentConfig c;
    get_opt(document, "seed", c.seed, "config");
    get_opt(document, "name", c.name, "config");
    c.dataset = parse_dataset(require(document, "dataset", "config"));
    c.estimator = serialize::spec_from_json(require(document, "estimator", "config"), "estimator");
    c.grid = parse_grid(document, c.estimator);
    c.cv = parse_cv(document);
    c.task = parse_task(document);
    c.metrics = parse_metrics(document);
    const bool open = c.task.mode == forecast::Mode::open_loop;
    if (c.dataset.kind == "bekk" && !open) bad("task.mode", "bekk data is an input/output task; use open-loop");
    if (c.dataset.kind == "csv" && open && c.dataset.outputs_path.empty())
        bad("dataset.outputs_path", "open-loop tasks need an outputs file");
    if (!open && c.estimator.outputs != estimator::OutputScaling::same_as_inputs)
        bad("estimator.outputs", "path continuation feeds predictions back; use same-as-inputs");
    if (open && c.estimator.outputs == estimator::OutputScaling::same_as_inputs)
        bad("estimator.outputs", "open-loop targets need covariance or none scaling");
    c.document = std::move(document);
    c.hash = serialize::config_hash(c.document);
    return c;
}

ExperimentConfig load_config(const fs::path& path, std::optional<std::uint64_t> seed_override) {
    Json j;
    try {
        j = serialize::read_json(path);
    } catch (const DependencyError& e) {
        throw ConfigError(e.what());
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
    return parse_config(std::move(j), seed_override);
}

// ---------------------------------------------------------------------------
// Presets

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const char* data : {"lorenz", "mackey-glass", "bekk"})
        for (const char* est : {"ngrc", "polynomial", "volterra"}) out.push_back(std::string(data) + "-" + est);
    return out;
}

Json preset(const std::string& name) {
    const auto dash = name.rfind('-');
    if (dash == std::string::npos) bad("preset", "unknown preset '" + name + "'");
    const std::string data = name.substr(0, dash), est = name.substr(dash + 1);
    Json j{{"schema", kSchema}, {"name", name}, {"seed", 0}};
    Json e;
    if (data == "lorenz") {
        j["dataset"] = {{"kind", "lorenz"}, {"dt", 0.005}, {"n_points", 15001}, {"initial", {0.0, 1.0, 1.05}},
                        {"n_train", 5000}};
        j["task"] = {{"mode", "path-continuation"}, {"lyapunov_exponent", 0.9056}, {"threshold", 0.2}};
        j["cv"] = {{"mode", "overlapping"}, {"fold_len", 2000}, {"val_len", 500}, {"stride", 1000}};
        j["metrics"] = {{"nperseg", 2048}, {"overlap", 0.5}, {"w1_cap", 512}};
        if (est == "ngrc") {
            e = {{"kind", "ngrc"}, {"tau", 3}, {"p", 2}, {"lambda_reg", 1e-7}, {"washout", 3}};
            j["grid"] = {{"tau", {2, 3, 4}}, {"p", {2, 3}}, {"lambda_reg", {1e-8, 1e-7, 1e-6}}};
        } else if (est == "polynomial") {
            e = {{"kind", "polynomial"}, {"tau", 6}, {"p", 2}, {"c", 1.0}, {"lambda_reg", 1e-6}, {"washout", 6}};
            j["grid"] = {{"tau", {4, 6}}, {"p", {2, 3}}, {"lambda_reg", {1e-6, 1e-5}}};
        } else if (est == "volterra") {
            e = {{"kind", "volterra"}, {"lambda", 0.3 * std::sqrt(0.91)}, {"theta", 0.3}, {"lambda_reg", 1e-10},
                 {"washout", 100}, {"norm_target", 1.0}};
            j["grid"] = {{"lambda", {0.2, 0.3 * std::sqrt(0.91), 0.4}}, {"theta", {0.3, 0.6}}, {"lambda_reg", {1e-10, 1e-8}}};
        }
    } else if (data == "mackey-glass") {
        j["dataset"] = {{"kind", "mackey-glass"}, {"dt_fine", 0.02}, {"delay", 17.0}, {"n_fine", 382500},
                        {"splice", 50}, {"n_train", 3000}};
        j["task"] = {{"mode", "path-continuation"}, {"lyapunov_exponent", 0.006}, {"threshold", 0.2}};
        j["cv"] = {{"mode", "overlapping"}, {"fold_len", 1500}, {"val_len", 300}, {"stride", 600}};
        j["metrics"] = {{"nperseg", 512}, {"overlap", 0.5}, {"w1_cap", 512}};
        if (est == "ngrc") {
            e = {{"kind", "ngrc"}, {"tau", 4}, {"p", 5}, {"lambda_reg", 1e-7}, {"washout", 4}};
            j["grid"] = {{"tau", {2, 4}}, {"p", {3, 5}}, {"lambda_reg", {1e-7, 1e-5}}};
        } else if (est == "polynomial") {
            e = {{"kind", "polynomial"}, {"tau", 17}, {"p", 4}, {"c", 1.0}, {"lambda_reg", 1e-5}, {"washout", 17}};
            j["grid"] = {{"tau", {9, 17}}, {"p", {3, 4}}, {"lambda_reg", {1e-5, 1e-4}}};
        } else if (est == "volterra") {
            e = {{"kind", "volterra"}, {"lambda", 0.9 * std::sqrt(0.91)}, {"theta", 0.3}, {"lambda_reg", 1e-9},
                 {"washout", 100}, {"norm_target", 1.0}};
            j["grid"] = {{"lambda", {0.5, 0.9 * std::sqrt(0.91)}}, {"theta", {0.3, 0.6}}, {"lambda_reg", {1e-9, 1e-7}}};
        }
    } else if (data == "bekk") {
        j["dataset"] = {{"kind", "bekk"}, {"d", 5}, {"n", 3760}, {"n_train", 3007}};
        j["task"] = {{"mode", "open-loop"}};
        j["cv"] = {{"mode", "expanding"}, {"k", 5}};
        j["metrics"] = {{"nperseg", 128}, {"overlap", 0.5}, {"w1_cap", 1024}};
        if (est == "ngrc") {
            e = {{"kind", "ngrc"}, {"tau", 1}, {"p", 2}, {"lambda_reg", 0.1}, {"washout", 1}};
            j["grid"] = {{"tau", {1, 2}}, {"p", {1, 2}}, {"lambda_reg", {0.01, 0.1, 1.0}}};
        } else if (est == "polynomial") {
            e = {{"kind", "polynomial"}, {"tau", 1}, {"p", 2}, {"c", 1.0}, {"lambda_reg", 0.1}, {"washout", 1}};
            j["grid"] = {{"tau", {1, 2}}, {"p", {1, 2}}, {"lambda_reg", {0.01, 0.1, 1.0}}};
        } else if (est == "volterra") {
            e = {{"kind", "volterra"}, {"lambda", 0.9 * std::sqrt(0.64)}, {"theta", 0.6}, {"lambda_reg", 1e-3},
                 {"washout", 100}, {"norm_target", 0.8}};
            j["grid"] = {{"lambda", {0.5, 0.9 * std::sqrt(0.64)}}, {"theta", {0.3, 0.6}}, {"lambda_reg", {1e-3, 1e-2}}};
        }
        if (!e.is_null()) e["outputs"] = "covariance";
    }
    if (e.is_null()) bad("preset", "unknown preset '" + name + "'");
    if (!e.contains("outputs")) e["outputs"] = "same-as-inputs";
    j["estimator"] = std::move(e);
    return j;
}

// ---------------------------------------------------------------------------
// Data

Dataset generate_dataset(const ExperimentConfig& config) {
    const auto& d = config.dataset;
    Dataset out;
    out.n_train = d.n_train;
    if (d.kind == "lorenz") {
        const Vector init = Eigen::Map<const Vector>(d.initial.data(), 3);
        out.inputs = datasets::simulate_lorenz(init, d.dt, d.n_points);
    } else if (d.kind == "mackey-glass") {
        out.inputs = datasets::simulate_mackey_glass(d.dt_fine, d.delay, d.n_fine, d.splice);
    } else if (d.kind == "bekk") {
        auto b = datasets::simulate_bekk(datasets::BekkParams::standard(d.bekk_d, config.seed), d.bekk_n);
        out.inputs = std::move(b.inputs);
        out.outputs = std::move(b.outputs);
        out.bekk_fallback_start = b.used_fallback_start;
    } else {
        out.inputs = datasets::load_csv(d.path);
        if (!d.outputs_path.empty()) {
            out.outputs = datasets::load_csv(d.outputs_path);
            if (out.outputs->length() != out.inputs.length())
                bad("dataset.outputs_path", "outputs and inputs differ in length");
        }
        if (d.n_train <= 1 || d.n_train >= out.inputs.length())
            bad("dataset.n_train", "must lie in (1, " + std::to_string(out.inputs.length()) + ")");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

Json MetricReport::to_json() const {
    Json j{{"nmse", nmse},
           {"mae", mae},
           {"mdae", mdae},
           {"mape", mape},
           {"psde", psde},
           {"w1", w1},
           {"pointwise_steps", pointwise_steps},
           {"psde_skipped_bins", psde_skipped_bins},
           {"w1_samples", w1_samples},
           {"truncated", truncated},
           {"flags", flags}};
    if (valid) j["t_valid"] = {{"lyapunov_times", valid->t_valid}, {"step", valid->step}, {"censored", valid->censored}};
    return j;
}

MetricReport evaluate(const Matrix& reference, const Matrix& predicted, double dt, const TaskConfig& task,
                      const MetricsConfig& mc, std::uint64_t seed, bool truncated) {
    if (predicted.cols() != reference.cols()) throw InvalidInput("prediction and reference widths differ");
    if (predicted.rows() > reference.rows()) throw InvalidInput("prediction is longer than the reference");
    MetricReport r;
    r.truncated = truncated || predicted.rows() < reference.rows();
    const Index c = predicted.rows();
    if (c < 2) {
        r.flags.push_back("fewer than two predicted steps; metrics undefined");
        const double nan = std::numeric_limits<double>::quiet_NaN();
        r.nmse = r.mae = r.mdae = r.mape = r.psde = r.w1 = nan;
    }
    Index steps = c;
    if (task.mode == forecast::Mode::path_continuation && task.lyapunov_exponent > 0.0) {
        forecast::ForecastRun run;
        run.reference = reference;
        run.predicted = predicted;
        run.horizon = reference.rows();
        run.truncated = r.truncated;
        r.valid = forecast::valid_time(run, task.lyapunov_exponent, dt, task.threshold);
        const double lt = mc.pointwise_lyapunov_times.value_or(std::ceil(r.valid->t_valid));
        const double want = std::ceil(lt / (dt * task.lyapunov_exponent) - 1e-9);
        steps = std::min<Index>(c, static_cast<Index>(std::max(2.0, want)));
    }
    if (c < 2) return r;
    r.pointwise_steps = steps;
    const Matrix y = reference.topRows(steps), yhat = predicted.topRows(steps);
    const auto n = metrics::nmse(y, yhat);
    r.nmse = n.value;
    if (!n.degenerate_dims.empty()) r.flags.push_back("nmse skipped zero-variance dimensions");
    r.mae = metrics::mae(y, yhat);
    r.mdae = metrics::mdae(y, yhat);
    r.mape = metrics::mape(y, yhat, mc.mape_eps);

    const Matrix full_ref = reference.topRows(c);
    const Index nperseg = std::min(mc.nperseg, c);
    const auto p_ref = metrics::welch_psd(full_ref, nperseg, mc.overlap, dt);
    const auto p_est = metrics::welch_psd(predicted, nperseg, mc.overlap, dt);
    const auto ps = metrics::psde(p_ref, p_est, mc.f_cut.value_or(std::numeric_limits<double>::infinity()));
    r.psde = ps.value;
    r.psde_skipped_bins = ps.skipped_zero_bins;
    if (nperseg < mc.nperseg) r.flags.push_back("nperseg reduced to the predicted length");

    if (reference.cols() == 1) {
        r.w1 = metrics::w1_1d(std::vector<double>(full_ref.data(), full_ref.data() + c),
                              std::vector<double>(predicted.data(), predicted.data() + c));
        r.w1_samples = c;
    } else {
        const Index k = std::min(c, mc.w1_cap);
        const Matrix a = metrics::subsample_rows(full_ref, k, seed ^ 0x5741534552535431ull);
        const Matrix b = metrics::subsample_rows(predicted, k, seed ^ 0x5741534552535432ull);
        r.w1 = metrics::w1_nd(a, b, mc.w1_cap);
        r.w1_samples = k;
        if (k < c) r.flags.push_back("w1 computed on seeded subsamples");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Stages

namespace {

Json manifest_base(const ExperimentConfig& c, const char* stage) {
    return Json{{"stage", stage}, {"config_hash", c.hash}, {"seed", c.seed}, {"config", c.document}};
}

Json read_manifest(const ExperimentConfig& c, const fs::path& out, const char* stage) {
    const fs::path p = out / (std::string(stage) + ".json");
    if (!fs::exists(p))
        throw DependencyError("missing upstream artifact " + p.string() + "; run the '" + stage + "' stage first");
    Json m = serialize::read_json(p);
    const std::string hash = m.value("config_hash", "");
    if (hash != c.hash)
        throw ConfigError("config hash mismatch: " + p.string() + " was produced with " + hash + ", current config is " +
                          c.hash);
    return m;
}

std::vector<std::string> hash_comments(const ExperimentConfig& c) {
    return {"config_hash=" + c.hash, "seed=" + std::to_string(c.seed)};
}

TimeSeries load_checked(const ExperimentConfig& c, const fs::path& p) {
    if (!fs::exists(p)) throw DependencyError("missing upstream artifact " + p.string());
    std::ifstream f(p);
    std::string line;
    const std::string want = "# config_hash=" + c.hash;
    bool found = false;
    while (std::getline(f, line) && !line.empty() && line[0] == '#')
        if (line == want) found = true;
    if (!found) throw ConfigError("config hash mismatch in " + p.string());
    return datasets::load_csv(p);
}

struct Blocks {
    Matrix train_in, test_in;
    Matrix train_out, test_out;  // open loop only
    double dt = 1.0;
};

Blocks load_blocks(const ExperimentConfig& c, const fs::path& out) {
    read_manifest(c, out, "simulate");
    Blocks b;
    const TimeSeries tr = load_checked(c, out / "train.csv");
    const TimeSeries te = load_checked(c, out / "test.csv");
    b.train_in = tr.values;
    b.test_in = te.values;
    b.dt = tr.dt;
    if (c.task.mode == forecast::Mode::open_loop) {
        b.train_out = load_checked(c, out / "train_outputs.csv").values;
        b.test_out = load_checked(c, out / "test_outputs.csv").values;
    }
    return b;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot open " + p.string() + " for writing");
    f << text;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void cmd_simulate(const ExperimentConfig& c, const fs::path& out) {
    fs::create_directories(out);
    Dataset data = generate_dataset(c);
    const auto comments = hash_comments(c);
    auto [train, test] = datasets::split_train_test(data.inputs, data.n_train);
    datasets::save_csv(data.inputs, out / "series.csv", comments);
    datasets::save_csv(train, out / "train.csv", comments);
    datasets::save_csv(test, out / "test.csv", comments);
    Json m = manifest_base(c, "simulate");
    m["n"] = data.inputs.length();
    m["n_train"] = data.n_train;
    m["dt"] = data.inputs.dt;
    m["files"] = {"series.csv", "train.csv", "test.csv"};
    if (data.outputs) {
        auto [otr, ote] = datasets::split_train_test(*data.outputs, data.n_train);
        datasets::save_csv(*data.outputs, out / "outputs.csv", comments);
        datasets::save_csv(otr, out / "train_outputs.csv", comments);
        datasets::save_csv(ote, out / "test_outputs.csv", comments);
        m["files"].push_back("outputs.csv");
        m["files"].push_back("train_outputs.csv");
        m["files"].push_back("test_outputs.csv");
        m["bekk_fallback_start"] = data.bekk_fallback_start;
    }
    serialize::write_json(m, out / "simulate.json");
}

void cmd_fit(const ExperimentConfig& c, const fs::path& out) {
    const Blocks b = load_blocks(c, out);
    estimator::FittedEstimator model;
    if (c.task.mode == forecast::Mode::path_continuation) {
        const Index n = b.train_in.rows();
        model = estimator::fit(c.estimator, b.train_in.topRows(n - 1), b.train_in.bottomRows(n - 1));
    } else {
        model = estimator::fit(c.estimator, b.train_in, b.train_out);
    }
    Json m = manifest_base(c, "fit");
    m["model"] = serialize::model_to_json(model);
    serialize::write_json(m, out / "fit.json");
}

void cmd_cv(const ExperimentConfig& c, const fs::path& out) {
    const Blocks b = load_blocks(c, out);
    cv::Grid grid = c.grid.value_or(cv::Grid{});
    if (!c.grid) grid.base = c.estimator;
    const Index n = b.train_in.rows();
    const cv::FoldPlan plan = c.cv.mode == cv::FoldMode::expanding
                                  ? cv::expanding_folds(n, c.cv.k)
                                  : cv::overlapping_folds(n, c.cv.fold_len, c.cv.val_len, c.cv.stride);
    const auto mode = c.task.mode == forecast::Mode::open_loop ? cv::TaskMode::open_loop
                                                               : cv::TaskMode::path_continuation;
    const cv::GridResult r = cv::grid_search(grid, plan, mode, b.train_in, b.train_out);

    std::string csv = "# config_hash=" + c.hash + "\nindex,estimator,kind,tau,p,lambda,theta,lambda_reg,mse";
    for (std::size_t k = 0; k < plan.folds.size(); ++k) csv += ",fold" + std::to_string(k);
    csv += ",error\n";
    for (std::size_t i = 0; i < r.table.size(); ++i) {
        const auto& row = r.table[i];
        const auto& s = row.spec;
        csv += std::to_string(i) + ",\"" + s.describe() + "\"," + std::string(estimator::family_name(s.family)) + "," +
               std::to_string(s.tau) + "," + std::to_string(s.p) + "," + fmt(s.lambda) + "," + fmt(s.theta) + "," +
               fmt(s.lambda_reg) + "," + fmt(row.mse);
        for (double f : row.fold_mse) csv += "," + fmt(f);
        std::string err = row.error;
        for (char& ch : err)
            if (ch == '"' || ch == '\n') ch = '\'';
        csv += ",\"" + err + "\"\n";
    }
    write_text(out / "leaderboard.csv", csv);
    Json m = manifest_base(c, "cv");
    m["best_index"] = r.best_index;
    m["best"] = serialize::spec_to_json(r.best);
    m["best_mse"] = r.table[r.best_index].mse;
    Json pruned = Json::array();
    for (const auto& [lam, th] : r.pruned) pruned.push_back({{"lambda", lam}, {"theta", th}});
    m["pruned"] = pruned;
    serialize::write_json(m, out / "cv.json");
}

void cmd_forecast(const ExperimentConfig& c, const fs::path& out) {
    const Blocks b = load_blocks(c, out);
    const Json fit = read_manifest(c, out, "fit");
    const auto model = serialize::model_from_json(fit.at("model"));
    forecast::ForecastRun run;
    if (c.task.mode == forecast::Mode::path_continuation) {
        const Index h = c.task.horizon > 0 ? std::min(c.task.horizon, b.test_in.rows()) : b.test_in.rows();
        run = forecast::path_continue(model, b.train_in.bottomRows(1), b.test_in.topRows(h));
    } else {
        const Index h = c.task.horizon > 0 ? std::min(c.task.horizon, b.test_in.rows()) : b.test_in.rows();
        run = forecast::open_loop(model, b.test_in.topRows(h), b.test_out.topRows(h));
    }
    forecast::save_run_csv(run, b.dt, out / "forecast.csv", hash_comments(c));
    Json m = manifest_base(c, "forecast");
    m["horizon"] = run.horizon;
    m["completed"] = run.completed();
    m["truncated"] = run.truncated;
    m["mode"] = run.mode == forecast::Mode::open_loop ? "open-loop" : "path-continuation";
    if (run.truncated) m["failure"] = {{"step", run.failure_step}, {"reason", run.failure}};
    serialize::write_json(m, out / "forecast.json");
}

void cmd_eval(const ExperimentConfig& c, const fs::path& out) {
    Matrix reference, predicted;
    double dt = 1.0;
    bool truncated = false;
    const Json& doc = c.document;
    if (doc.contains("eval") && doc.at("eval").is_object()) {
        // Explicit files, e.g. to score an external prediction.
        const auto ref_path = get<std::string>(doc.at("eval"), "reference", "eval");
        const auto pred_path = get<std::string>(doc.at("eval"), "predicted", "eval");
        if (!fs::exists(ref_path)) throw DependencyError("missing reference file " + ref_path);
        if (!fs::exists(pred_path)) throw DependencyError("missing prediction file " + pred_path);
        const TimeSeries ref = datasets::load_csv(ref_path);
        const TimeSeries pred = datasets::load_csv(pred_path);
        reference = ref.values;
        predicted = pred.values;
        dt = ref.dt;
    } else {
        const Json fm = read_manifest(c, out, "forecast");
        truncated = fm.at("truncated").get<bool>();
        const TimeSeries f = load_checked(c, out / "forecast.csv");
        const Index d = (f.dim() - 1) / 2;
        reference = f.values.leftCols(d);
        predicted = f.values.middleCols(d, d);
        dt = f.dt;
        // The CSV holds completed rows only; a truncated run needs the full reference.
        if (truncated) {
            const Blocks b = load_blocks(c, out);
            const Index h = fm.at("horizon").get<Index>();
            reference = c.task.mode == forecast::Mode::open_loop ? b.test_out.topRows(h) : b.test_in.topRows(h);
        }
    }
    const MetricReport r = evaluate(reference, predicted, dt, c.task, c.metrics, c.seed, truncated);
    std::string csv = "# config_hash=" + c.hash + "\nname,nmse,mae,mdae,mape,psde,w1,t_valid,censored,truncated,pointwise_steps\n";
    csv += c.name + "," + fmt(r.nmse) + "," + fmt(r.mae) + "," + fmt(r.mdae) + "," + fmt(r.mape) + "," + fmt(r.psde) +
           "," + fmt(r.w1) + "," + (r.valid ? fmt(r.valid->t_valid) : std::string("")) + "," +
           (r.valid && r.valid->censored ? "1" : "0") + "," + (r.truncated ? "1" : "0") + "," +
           std::to_string(r.pointwise_steps) + "\n";
    write_text(out / "metrics.csv", csv);
    Json m = manifest_base(c, "eval");
    m["report"] = r.to_json();
    serialize::write_json(m, out / "eval.json");
}

void run_pipeline(const ExperimentConfig& config, const fs::path& out) {
    cmd_simulate(config, out);
    cmd_fit(config, out);
    cmd_forecast(config, out);
    cmd_eval(config, out);
}

}  // namespace vrc::experiment

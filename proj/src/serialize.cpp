#include "vrc/serialize.hpp"

#include <cstdio>
#include <fstream>

#include "vrc/error.hpp"

namespace vrc::serialize {

Json matrix_to_json(const Matrix& m) {
    Json data = Json::array();
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const Json& j) {
    const Index rows = j.at("rows").get<Index>(), cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows * cols)
        throw ParseError("matrix payload size does not match its shape");
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index c = 0; c < cols; ++c) m(i, c) = data[static_cast<std::size_t>(i * cols + c)].get<double>();
    return m;
}

namespace {

Json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const Json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

std::string_view output_name(estimator::OutputScaling s) {
    switch (s) {
        case estimator::OutputScaling::same_as_inputs: return "same-as-inputs";
        case estimator::OutputScaling::covariance: return "covariance";
        case estimator::OutputScaling::none: return "none";
    }
    return "none";
}

estimator::OutputScaling output_from_name(const std::string& s, const std::string& path) {
    if (s == "same-as-inputs") return estimator::OutputScaling::same_as_inputs;
    if (s == "covariance") return estimator::OutputScaling::covariance;
    if (s == "none") return estimator::OutputScaling::none;
    throw ConfigError(path + ".outputs: unknown scaling '" + s + "'");
}

template <typename T>
void read_field(const Json& j, const char* key, T& out, const std::string& path) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(path + "." + key + ": wrong type");
    }
}

Json pipeline_to_json(const preprocess::Pipeline& p) {
    Json steps = Json::array();
    for (const auto& s : p.steps)
        steps.push_back({{"kind", std::string(preprocess::kind_name(s.kind))},
                         {"shift", vector_to_json(s.shift)},
                         {"scale", vector_to_json(s.scale)},
                         {"parameter", s.parameter},
                         {"degenerate", s.degenerate}});
    return steps;
}

preprocess::Pipeline pipeline_from_json(const Json& j) {
    preprocess::Pipeline p;
    for (const auto& s : j) {
        preprocess::Transform t;
        t.kind = preprocess::kind_from_name(s.at("kind").get<std::string>());
        t.shift = vector_from_json(s.at("shift"));
        t.scale = vector_from_json(s.at("scale"));
        t.parameter = s.at("parameter").get<double>();
        t.degenerate = s.at("degenerate").get<bool>();
        p.steps.push_back(std::move(t));
    }
    return p;
}

Json diagnostics_to_json(const linsolve::RidgeSolution& r) {
    return {{"regularizer", r.regularizer},
            {"smallest_pivot", r.smallest_pivot},
            {"rank", r.rank},
            {"jitter_retries", r.jitter_retries},
            {"route", r.route}};
}

linsolve::RidgeSolution diagnostics_from_json(const Json& j, Matrix coefficients) {
    linsolve::RidgeSolution r;
    r.coefficients = std::move(coefficients);
    r.regularizer = j.at("regularizer").get<double>();
    r.smallest_pivot = j.at("smallest_pivot").get<double>();
    r.rank = j.at("rank").get<Index>();
    r.jitter_retries = j.at("jitter_retries").get<int>();
    r.route = j.at("route").get<std::string>();
    return r;
}

}  // namespace

Json spec_to_json(const estimator::EstimatorSpec& s) {
    Json j{{"kind", std::string(estimator::family_name(s.family))},
           {"lambda_reg", s.lambda_reg},
           {"washout", s.washout},
           {"outputs", std::string(output_name(s.outputs))}};
    if (s.family == estimator::EstimatorFamily::volterra) {
        j["lambda"] = s.lambda;
        j["theta"] = s.theta;
        j["norm_target"] = s.norm_target;
        j["border"] = s.border == kernels::VolterraBorder::theta ? "theta" : "zero-padded";
    } else {
        j["tau"] = s.tau;
        j["p"] = s.p;
        if (s.family == estimator::EstimatorFamily::polynomial) j["c"] = s.c;
    }
    return j;
}

estimator::EstimatorSpec spec_from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    estimator::EstimatorSpec s;
    std::string kind;
    read_field(j, "kind", kind, path);
    try {
        s.family = estimator::family_from_name(kind);
    } catch (const InvalidInput& e) {
        throw ConfigError(path + ".kind: " + e.what());
    }
    read_field(j, "tau", s.tau, path);
    read_field(j, "p", s.p, path);
    read_field(j, "c", s.c, path);
    read_field(j, "lambda", s.lambda, path);
    read_field(j, "theta", s.theta, path);
    read_field(j, "lambda_reg", s.lambda_reg, path);
    read_field(j, "washout", s.washout, path);
    read_field(j, "norm_target", s.norm_target, path);
    std::string border = "zero-padded", outputs = "same-as-inputs";
    read_field(j, "border", border, path);
    read_field(j, "outputs", outputs, path);
    if (border == "theta")
        s.border = kernels::VolterraBorder::theta;
    else if (border != "zero-padded")
        throw ConfigError(path + ".border: expected 'zero-padded' or 'theta'");
    s.outputs = output_from_name(outputs, path);
    try {
        s.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return s;
}

Json model_to_json(const estimator::FittedEstimator& m) {
    Json j{{"format", "vrc-model"},
           {"version", 1},
           {"spec", spec_to_json(m.spec)},
           {"d_in", m.d_in},
           {"d_out", m.d_out},
           {"input_transform", pipeline_to_json(m.input_tf)},
           {"output_transform", pipeline_to_json(m.output_tf)},
           {"diagnostics", diagnostics_to_json(m.diagnostics())}};
    if (m.ngrc) {
        j["weights"] = matrix_to_json(m.ngrc->weights);
        j["context"] = vector_to_json(m.context);
    } else {
        j["alpha"] = matrix_to_json(m.kernel->alpha);
        j["train_rows"] = matrix_to_json(m.kernel->train_rows);
        j["fit_washout"] = m.kernel->washout;
        if (m.spec.family == estimator::EstimatorFamily::volterra)
            j["last_column"] = vector_to_json(m.kernel->last_column);
        else
            j["context"] = vector_to_json(m.context);
    }
    return j;
}

estimator::FittedEstimator model_from_json(const Json& j) {
    try {
        if (j.at("format").get<std::string>() != "vrc-model") throw ParseError("not a model document");
        estimator::FittedEstimator m;
        m.spec = spec_from_json(j.at("spec"), "spec");
        m.d_in = j.at("d_in").get<Index>();
        m.d_out = j.at("d_out").get<Index>();
        m.input_tf = pipeline_from_json(j.at("input_transform"));
        m.output_tf = pipeline_from_json(j.at("output_transform"));
        const auto& diag = j.at("diagnostics");
        if (m.spec.family == estimator::EstimatorFamily::ngrc) {
            ngrc::NgrcModel g;
            g.delay = {m.spec.tau, static_cast<int>(m.d_in)};
            g.exponents = ngrc::ExponentTable::build(m.spec.tau, static_cast<int>(m.d_in), m.spec.p);
            g.weights = matrix_from_json(j.at("weights"));
            g.lambda_reg = m.spec.lambda_reg;
            g.diagnostics = diagnostics_from_json(diag, g.weights);
            if (g.weights.rows() != g.exponents.size()) throw ParseError("weights do not match the feature count");
            m.ngrc = std::move(g);
            m.context = vector_from_json(j.at("context"));
        } else {
            kernels::KernelModel k;
            k.d = m.d_in;
            k.alpha = matrix_from_json(j.at("alpha"));
            k.train_rows = matrix_from_json(j.at("train_rows"));
            k.washout = j.at("fit_washout").get<Index>();
            k.lambda_reg = m.spec.lambda_reg;
            k.diagnostics = diagnostics_from_json(diag, k.alpha);
            if (m.spec.family == estimator::EstimatorFamily::volterra) {
                k.kernel.kind = kernels::KernelKind::volterra;
                k.kernel.volterra = m.spec.volterra();
                k.last_column = vector_from_json(j.at("last_column"));
                m.train_by_dim = k.train_rows.transpose();
                if (k.last_column.size() != k.train_rows.rows() ||
                    k.alpha.rows() != k.train_rows.rows() - k.washout)
                    throw ParseError("Volterra model arrays disagree in length");
            } else {
                k.kernel.kind = kernels::KernelKind::polynomial;
                k.kernel.tau = m.spec.tau;
                k.kernel.p = m.spec.p;
                k.kernel.c = m.spec.c;
                m.context = vector_from_json(j.at("context"));
                if (k.alpha.rows() != k.train_rows.rows()) throw ParseError("alpha does not match the training rows");
            }
            m.kernel = std::move(k);
        }
        if (m.context.size() != 0 && m.context.size() != (m.spec.tau - 1) * m.d_in)
            throw ParseError("lag context has the wrong length");
        return m;
    } catch (const Json::exception& e) {
        throw ParseError(std::string("model document: ") + e.what());
    }
}

std::string config_hash(const Json& j) {
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Json read_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DependencyError("missing file " + path.string());
    try {
        return Json::parse(f);
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json(const Json& j, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << j.dump(2) << '\n';
}

}  // namespace vrc::serialize

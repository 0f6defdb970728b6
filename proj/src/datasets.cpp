#include "vrc/datasets.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vrc/error.hpp"
#include "vrc/linsolve.hpp"
#include "vrc/rng.hpp"

namespace vrc {

void TimeSeries::validate() const {
    if (values.rows() < 1) throw InvalidInput("time series must have at least one row");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("time series dt must be positive");
    if (!values.allFinite()) throw InvalidInput("time series contains non-finite values");
}

namespace datasets {

TimeSeries simulate_lorenz(const Vector& initial, double dt, Index n_points, const LorenzParams& p,
                           const ode::Dopri5Options& options) {
    if (initial.size() != 3) throw InvalidInput("Lorenz initial state must have 3 components");
    if (!(dt > 0.0)) throw InvalidInput("Lorenz dt must be positive");
    auto rhs = [p](double, std::span<const double> y, std::span<double> f) {
        f[0] = p.sigma * (y[1] - y[0]);
        f[1] = y[0] * (p.rho - y[2]) - y[1];
        f[2] = y[0] * y[1] - p.beta * y[2];
    };
    TimeSeries out;
    out.values = ode::integrate_dopri5(rhs, initial, 0.0, dt, n_points, options);
    out.dt = dt;
    out.origin = "lorenz";
    return out;
}

TimeSeries simulate_mackey_glass(double dt_fine, double delay, Index n_fine, Index splice,
                                 const MackeyGlassParams& p) {
    if (splice < 1) throw InvalidInput("splice stride must be at least 1");
    auto rhs = [p](double, double z, double zd) { return p.beta * zd / (1.0 + std::pow(zd, p.exponent)) - p.gamma * z; };
    const Vector fine = ode::integrate_delay_fixed(rhs, p.history, dt_fine, delay, n_fine);
    const Index n = (n_fine + splice - 1) / splice;
    TimeSeries out;
    out.values.resize(n, 1);
    for (Index i = 0; i < n; ++i) out.values(i, 0) = fine(i * splice);
    out.dt = dt_fine * static_cast<double>(splice);
    out.origin = "mackey-glass";
    return out;
}

void BekkParams::validate() const {
    const Index d = a.size();
    if (d < 1) throw InvalidInput("BEKK dimension must be positive");
    if (b.size() != d || C.rows() != d || C.cols() != d) throw InvalidInput("BEKK parameter shapes disagree");
    for (Index i = 0; i < d; ++i) {
        if (!(a(i) > 0.0)) throw InvalidInput("BEKK requires A_ii > 0");
        if (!(std::abs(b(i)) < 1.0)) throw InvalidInput("BEKK requires |B_ii| < 1");
        for (Index j = 0; j < i; ++j)
            if (C(i, j) != 0.0) throw InvalidInput("BEKK C must be upper triangular");
    }
    if (!C.allFinite() || !a.allFinite() || !b.allFinite()) throw InvalidInput("BEKK parameters must be finite");
}

BekkParams BekkParams::standard(Index d, std::uint64_t seed) {
    BekkParams p;
    p.C = Matrix::Zero(d, d);
    p.a.resize(d);
    p.b.resize(d);
    for (Index i = 0; i < d; ++i) {
        p.C(i, i) = 0.004;
        for (Index j = i + 1; j < d; ++j) p.C(i, j) = 0.001;
        p.a(i) = 0.3 + 0.01 * static_cast<double>(i % 5);
        p.b(i) = 0.92 - 0.005 * static_cast<double>(i % 5);
    }
    p.seed = seed;
    return p;
}

bool bekk_unconditional(const BekkParams& params, Matrix& out) {
    const Index d = params.dim();
    const Matrix cc = params.C * params.C.transpose();
    Matrix s(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) {
            const double denom = 1.0 - params.a(i) * params.a(j) - params.b(i) * params.b(j);
            if (!(denom > 0.0)) return false;
            s(i, j) = cc(i, j) / denom;
        }
    out = s;
    return true;
}

BekkSeries simulate_bekk(const BekkParams& params, Index n) {
    params.validate();
    if (n < 1) throw InvalidInput("BEKK length must be positive");
    const Index d = params.dim();
    const Index q = d * (d + 1) / 2;
    BekkSeries out;
    Matrix sigma;
    const Matrix cc = params.C * params.C.transpose();
    if (!bekk_unconditional(params, sigma)) {
        const double bmax = params.b.cwiseAbs().maxCoeff();
        sigma = cc / (1.0 - bmax * bmax);
        out.used_fallback_start = true;
    }
    out.inputs.values.resize(n, d);
    out.returns.values.resize(n, d);
    out.outputs.values.resize(n, q);
    PhiloxRng rng(params.seed);
    Vector z(d), r(d);
    for (Index t = 0; t < n; ++t) {
        if (t > 0) {
            // Elementwise form of the diagonal recursion.
            Matrix next(d, d);
            for (Index i = 0; i < d; ++i)
                for (Index j = 0; j < d; ++j)
                    next(i, j) = cc(i, j) + params.a(i) * params.a(j) * r(i) * r(j) +
                                 params.b(i) * params.b(j) * sigma(i, j);
            sigma = 0.5 * (next + next.transpose());
        }
        for (Index i = 0; i < d; ++i) z(i) = rng.normal();
        r = linsolve::psd_sqrt(sigma) * z;
        out.inputs.values.row(t) = z.transpose();
        out.returns.values.row(t) = r.transpose();
        out.outputs.values.row(t) = vech(sigma).transpose();
    }
    for (TimeSeries* s : {&out.inputs, &out.returns, &out.outputs}) s->dt = 1.0;
    out.inputs.origin = "bekk-innovations";
    out.returns.origin = "bekk-returns";
    out.outputs.origin = "bekk-vech-covariance";
    return out;
}

Vector vech(const Matrix& S) {
    const Index d = S.rows();
    if (S.cols() != d) throw InvalidInput("vech needs a square matrix");
    const double tol = 1e-12 * std::max(1.0, S.cwiseAbs().maxCoeff());
    Vector v(d * (d + 1) / 2);
    Index k = 0;
    for (Index j = 0; j < d; ++j)
        for (Index i = j; i < d; ++i) {
            if (std::abs(S(i, j) - S(j, i)) > tol) throw InvalidInput("vech needs a symmetric matrix");
            v(k++) = S(i, j);
        }
    return v;
}

Index vech_dim(Index q) {
    Index d = 0;
    while (d * (d + 1) / 2 < q) ++d;
    if (d * (d + 1) / 2 != q) throw InvalidInput("length " + std::to_string(q) + " is not a vech length");
    return d;
}

Matrix inverse_vech(const Vector& v) {
    const Index d = vech_dim(v.size());
    Matrix S(d, d);
    Index k = 0;
    for (Index j = 0; j < d; ++j)
        for (Index i = j; i < d; ++i) {
            S(i, j) = v(k);
            S(j, i) = v(k);
            ++k;
        }
    return S;
}

namespace {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_cell(std::string_view cell, std::size_t line, std::size_t column) {
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.remove_suffix(1);
    auto fail = [&](const std::string& why) {
        return ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + why);
    };
    if (cell.empty()) throw fail("missing value");
    double x = 0;
    const char* first = cell.data();
    if (*first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), x);
    if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw fail("malformed number '" + std::string(cell) + "'");
    return x;
}

}  // namespace

void save_csv(const TimeSeries& series, const std::filesystem::path& path, const std::vector<std::string>& comments) {
    series.validate();
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << "# dt=" << format_double(series.dt) << '\n';
    if (!series.origin.empty()) f << "# origin=" << series.origin << '\n';
    for (const auto& c : comments) f << "# " << c << '\n';
    f << 't';
    for (Index j = 0; j < series.dim(); ++j) f << ",c" << j;
    f << '\n';
    std::string line;
    for (Index i = 0; i < series.length(); ++i) {
        line = format_double(static_cast<double>(i) * series.dt);
        for (Index j = 0; j < series.dim(); ++j) {
            line += ',';
            line += format_double(series.values(i, j));
        }
        line += '\n';
        f << line;
    }
    if (!f) throw Error("write failed for " + path.string());
}

TimeSeries load_csv(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open " + path.string());
    TimeSeries out;
    bool have_dt = false, have_header = false;
    std::size_t columns = 0;
    std::vector<double> data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# dt=", 0) == 0) {
                out.dt = parse_cell(std::string_view(line).substr(5), line_no, 1);
                have_dt = true;
            } else if (line.rfind("# origin=", 0) == 0) {
                out.origin = line.substr(9);
            }
            continue;
        }
        std::vector<std::string_view> cells;
        std::string_view rest(line);
        for (;;) {
            const auto pos = rest.find(',');
            cells.push_back(rest.substr(0, pos));
            if (pos == std::string_view::npos) break;
            rest.remove_prefix(pos + 1);
        }
        if (!have_header) {
            if (cells.size() < 2 || cells[0] != "t")
                throw ParseError("line " + std::to_string(line_no) + ": expected header starting with 't'");
            columns = cells.size();
            have_header = true;
            continue;
        }
        if (cells.size() != columns)
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                             " cells, found " + std::to_string(cells.size()));
        for (std::size_t c = 1; c < cells.size(); ++c) data.push_back(parse_cell(cells[c], line_no, c + 1));
    }
    if (!have_header) throw ParseError(path.string() + ": missing header row");
    if (!have_dt) throw ParseError(path.string() + ": missing '# dt=' line");
    const Index d = static_cast<Index>(columns - 1);
    const Index n = d ? static_cast<Index>(data.size()) / d : 0;
    out.values = Eigen::Map<Matrix>(data.data(), n, d);
    try {
        out.validate();
    } catch (const InvalidInput& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return out;
}

std::pair<TimeSeries, TimeSeries> split_train_test(const TimeSeries& series, Index n_train) {
    const Index n = series.length();
    if (n_train <= 0 || n_train >= n)
        throw InvalidInput("n_train must lie in (0, " + std::to_string(n) + "), got " + std::to_string(n_train));
    TimeSeries train{series.values.topRows(n_train), series.dt, series.origin};
    TimeSeries test{series.values.bottomRows(n - n_train), series.dt, series.origin};
    return {std::move(train), std::move(test)};
}

}  // namespace datasets
}  // namespace vrc

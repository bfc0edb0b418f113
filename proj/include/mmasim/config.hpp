// SPDX-License-Identifier: Apache-2.0
//! \file config.hpp
//! Experiment configuration: JSON schema, validation with line/field
//! diagnostics, and the config checksum carried by every output file.
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "conditions.hpp"
#include "integration.hpp"
#include "kernels.hpp"
#include "measures.hpp"
#include "pointproc.hpp"
#include "records.hpp"
#include "simulate.hpp"

namespace mmasim {

class ConfigError : public std::runtime_error
{
  public:
    ConfigError(std::string field, int line, std::string const& msg)
        : std::runtime_error(format(field, line, msg)), field_(std::move(field)), line_(line)
    {
    }
    std::string const& field() const { return field_; }
    int line() const { return line_; }

  private:
    static std::string format(std::string const& field, int line, std::string const& msg)
    {
        std::string s = "config";
        if (line > 0)
            s += ":" + std::to_string(line);
        if (!field.empty())
            s += ": field " + field;
        return s + ": " + msg;
    }
    std::string field_;
    int line_;
};

enum class PathFormat
{
    csv,
    binary
};

struct EstimateSettings
{
    std::optional<std::size_t> hill_k;
    double spectral_u = 1;  //!< threshold on sup-norm / a_n
    double relcomp_eps = 0.5;
    std::vector<double> relcomp_deltas{0.1, 0.05, 0.025};
    std::vector<SetQuery> mu_queries{SetQuery::radial(1), SetQuery::radial(2), SetQuery::radial(4)};
    std::optional<double> a_n;
    bool power_scaling = false;  //!< a_n = (n c)^{1/alpha} instead of n mu_X(||x|| > a_n) = 1
};

struct PointProcessSettings
{
    std::optional<double> a_n;
    double u = 1;
    std::vector<Shell> shells{{1, 2}, {2, 4}};
    std::size_t blocks = 20;
};

struct ExperimentConfig
{
    int dimension = 1;
    double alpha = 0;
    GeneratingQuadruple quad;
    KernelSpec kernel;
    std::vector<double> grid;
    std::size_t n_paths = 10;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    TruncationSettings trunc;
    ConditionSettings cond;
    EstimateSettings estimate;
    PointProcessSettings pointprocess;
    std::string output_dir = "out";
    PathFormat format = PathFormat::csv;
    std::string canonical;  //!< canonical dump of the effective config (threads excluded)
    std::uint64_t checksum = 0;
};

namespace detail {

//! Best-effort source line of a JSON pointer: follows object keys through the text.
inline int line_of(std::string const& text, std::vector<std::string> const& path)
{
    std::size_t pos = 0;
    for (auto const& key : path)
    {
        if (!key.empty() && key.find_first_not_of("0123456789") == std::string::npos)
            continue;
        auto const p = text.find("\"" + key + "\"", pos);
        if (p == std::string::npos)
            break;
        pos = p;
    }
    if (pos == 0 && !path.empty())
        return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Node
{
  public:
    Node(Json const& j, std::string const& text, std::vector<std::string> path = {})
        : j_(&j), text_(&text), path_(std::move(path))
    {
    }

    std::string pointer() const
    {
        std::string s;
        for (auto const& p : path_)
            s += "/" + p;
        return s.empty() ? "/" : s;
    }

    [[noreturn]] void fail(std::string const& msg) const { throw ConfigError(pointer(), line_of(*text_, path_), msg); }

    Json const& raw() const { return *j_; }
    bool has(std::string const& key) const { return j_->is_object() && j_->contains(key); }

    Node at(std::string const& key) const
    {
        if (!j_->is_object())
            fail("expected an object");
        if (!j_->contains(key))
            child_path_fail(key, "missing required field");
        auto p = path_;
        p.push_back(key);
        return Node((*j_)[key], *text_, p);
    }

    Node at(std::size_t i) const
    {
        auto p = path_;
        p.push_back(std::to_string(i));
        return Node((*j_)[i], *text_, p);
    }

    std::size_t size() const
    {
        if (!j_->is_array())
            fail("expected an array");
        return j_->size();
    }

    //! Rejects keys outside \c allowed.
    void keys(std::set<std::string> const& allowed) const
    {
        if (!j_->is_object())
            fail("expected an object");
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!allowed.count(it.key()))
            {
                auto p = path_;
                p.push_back(it.key());
                Node(it.value(), *text_, p).fail("unknown key");
            }
    }

    double number() const
    {
        if (!j_->is_number())
            fail("expected a number");
        return j_->get<double>();
    }

    double positive() const
    {
        double const v = number();
        if (!(v > 0))
            fail("must be positive");
        return v;
    }

    std::uint64_t unsigned_int() const
    {
        if (!j_->is_number_unsigned() && !(j_->is_number_integer() && j_->get<std::int64_t>() >= 0))
            fail("expected a nonnegative integer");
        return j_->get<std::uint64_t>();
    }

    std::string string() const
    {
        if (!j_->is_string())
            fail("expected a string");
        return j_->get<std::string>();
    }

    std::vector<double> numbers() const
    {
        if (j_->is_number())
            return {number()};
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i)
            out.push_back(at(i).number());
        return out;
    }

    Vector vector(int n) const
    {
        auto const v = numbers();
        if (static_cast<int>(v.size()) != n)
            fail("expected " + std::to_string(n) + " numbers");
        return Eigen::Map<Vector const>(v.data(), n);
    }

    //! Row-major matrix; a single number is accepted for 1 x 1.
    Matrix matrix(int rows, int cols) const
    {
        auto const v = numbers();
        if (static_cast<int>(v.size()) != rows * cols)
            fail("expected " + std::to_string(rows * cols) + " numbers (row-major " + std::to_string(rows) + "x" +
                 std::to_string(cols) + ")");
        Matrix m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j)
                m(i, j) = v[static_cast<std::size_t>(i * cols + j)];
        return m;
    }

  private:
    [[noreturn]] void child_path_fail(std::string const& key, std::string const& msg) const
    {
        auto p = path_;
        p.push_back(key);
        throw ConfigError(Node(*j_, *text_, p).pointer(), line_of(*text_, path_), msg);
    }

    Json const* j_;
    std::string const* text_;
    std::vector<std::string> path_;
};

//! Runs a library constructor and reports its domain errors against a config field.
template <class F>
auto guarded(Node const& n, F&& f)
{
    try
    {
        return f();
    }
    catch (DomainError const& e)
    {
        n.fail(e.what());
    }
}

inline std::pair<std::vector<Vector>, std::vector<double>> spectral(Node const& n, int d)
{
    if (!n.has("directions"))
    {
        if (d != 1)
            n.at("directions");
        return {{Vector::Ones(1)}, {1.0}};
    }
    auto const dn = n.at("directions");
    std::vector<Vector> dirs;
    for (std::size_t i = 0; i < dn.size(); ++i)
        dirs.push_back(dn.at(i).vector(d));
    std::vector<double> w;
    if (n.has("weights"))
        w = n.at("weights").numbers();
    else if (dirs.size() == 1)
        w = {1.0};
    else
        n.at("weights");
    return {dirs, w};
}

inline LevyMeasure parse_levy(Node const& n, int d)
{
    auto const type = n.at("type").string();
    if (type == "finite_discrete")
    {
        n.keys({"type", "atoms", "rates"});
        auto const an = n.at("atoms");
        std::vector<Vector> atoms;
        for (std::size_t i = 0; i < an.size(); ++i)
            atoms.push_back(an.at(i).vector(d));
        auto rates = n.at("rates").numbers();
        return guarded(n, [&] { return LevyMeasure::finite_discrete(atoms, rates); });
    }
    if (type == "pareto")
    {
        n.keys({"type", "alpha", "c", "r_min", "directions", "weights"});
        double const a = n.at("alpha").positive();
        double const c = n.at("c").positive();
        double const r_min = n.at("r_min").number();
        auto [dirs, w] = spectral(n, d);
        return guarded(n, [&] { return LevyMeasure::pareto_radial(a, c, dirs, w, r_min); });
    }
    if (type == "alpha_stable")
    {
        n.keys({"type", "alpha", "scale", "directions", "weights"});
        double const a = n.at("alpha").positive();
        double const scale = n.at("scale").positive();
        auto [dirs, w] = spectral(n, d);
        return guarded(n, [&] { return LevyMeasure::alpha_stable_radial(a, scale, dirs, w); });
    }
    n.at("type").fail("unknown Lévy measure type '" + type + "' (finite_discrete, pareto, alpha_stable)");
}

inline MixingMeasure parse_mixing(Node const& n, int d, EnvelopeOverrides& ov)
{
    auto const type = n.at("type").string();
    if (type == "discrete")
    {
        n.keys({"type", "atoms"});
        auto const an = n.at("atoms");
        std::vector<MixingMeasure::Atom> atoms;
        for (std::size_t i = 0; i < an.size(); ++i)
        {
            auto const a = an.at(i);
            a.keys({"A", "p", "kappa", "rho"});
            MixingMeasure::Atom at{a.at("A").matrix(d, d), a.at("p").positive()};
            if (a.has("kappa") != a.has("rho"))
                a.fail("kappa and rho must be given together");
            if (a.has("kappa"))
                ov.push_back({at.A, {a.at("kappa").positive(), a.at("rho").positive()}});
            atoms.push_back(at);
        }
        return guarded(n, [&] { return MixingMeasure::discrete(atoms); });
    }
    using F = MixingMeasure::Family;
    if (type == "gamma")
    {
        n.keys({"type", "shape", "rate"});
        double const a = n.at("shape").positive();
        double const b = n.at("rate").positive();
        return guarded(n, [&] { return MixingMeasure::scalar(d, F::gamma, a, b); });
    }
    if (type == "exponential")
    {
        n.keys({"type", "rate"});
        double const b = n.at("rate").positive();
        return guarded(n, [&] { return MixingMeasure::scalar(d, F::exponential, b); });
    }
    if (type == "uniform")
    {
        n.keys({"type", "lo", "hi"});
        double const lo = n.at("lo").number();
        double const hi = n.at("hi").number();
        return guarded(n, [&] { return MixingMeasure::scalar(d, F::uniform, lo, hi); });
    }
    if (type == "lognormal")
    {
        n.keys({"type", "mu", "sigma"});
        double const mu = n.at("mu").number();
        double const sigma = n.at("sigma").positive();
        return guarded(n, [&] { return MixingMeasure::scalar(d, F::lognormal, mu, sigma); });
    }
    n.at("type").fail("unknown mixing measure type '" + type + "' (discrete, gamma, exponential, uniform, lognormal)");
}

inline KernelSpec parse_kernel(Node const& n, int d, EnvelopeOverrides const& ov)
{
    auto const name = n.at("name").string();
    if (name == "supou")
    {
        n.keys({"name"});
        return supou_kernel(d, ov);
    }
    if (name == "two_sided_supou")
    {
        n.keys({"name"});
        return two_sided_supou_kernel(d, ov);
    }
    if (name == "indicator_test")
    {
        n.keys({"name", "width"});
        double const w = n.has("width") ? n.at("width").positive() : 0.5;
        return guarded(n, [&] { return indicator_test_kernel(d, w); });
    }
    if (name == "exp_poly")
    {
        n.keys({"name", "rows", "B", "coefficients"});
        int const rows = n.has("rows") ? static_cast<int>(n.at("rows").unsigned_int()) : d;
        if (rows < 1)
            n.at("rows").fail("must be >= 1");
        Matrix const b = n.has("B") ? n.at("B").matrix(rows, d) : Matrix(Matrix::Identity(rows, d));
        auto const coeffs = n.at("coefficients").numbers();
        return guarded(n, [&] { return exp_poly_kernel(b, coeffs, ov); });
    }
    n.at("name").fail("unknown kernel '" + name + "' (supou, two_sided_supou, indicator_test, exp_poly)");
}

inline SetQuery parse_query(Node const& n, int rows)
{
    n.keys({"r", "lo", "hi", "times"});
    std::vector<double> times{0.0};
    if (n.has("times"))
        times = n.at("times").numbers();
    if (times.empty())
        n.at("times").fail("needs at least one time");
    auto const len = rows * static_cast<int>(times.size());
    if (n.has("r"))
    {
        if (n.has("lo") || n.has("hi"))
            n.fail("give either r or lo/hi");
        double const r = n.at("r").positive();
        return SetQuery::radial(r, times);
    }
    auto lo = n.at("lo").vector(len);
    auto hi = n.at("hi").vector(len);
    auto q = guarded(n, [&] { return SetQuery::rectangle(lo, hi, times); });
    if (!(q.distance_from_origin() > 0))
        n.fail("query set must be bounded away from the origin");
    return q;
}

}  // namespace detail

//! Parses and validates a configuration text. Throws ConfigError.
inline ExperimentConfig parse_config(std::string const& text)
{
    Json root;
    try
    {
        root = Json::parse(text);
    }
    catch (nlohmann::json::parse_error const& e)
    {
        auto const upto = std::min<std::size_t>(e.byte, text.size());
        int const line =
            1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        throw ConfigError("", line, std::string("syntax error: ") + e.what());
    }
    detail::Node const top(root, text);
    top.keys({"dimension", "alpha", "quadruple", "kernel", "grid", "ensemble", "truncation", "tolerances", "estimate",
              "pointprocess", "output_dir", "format"});
    ExperimentConfig c;
    auto const dn = top.at("dimension");
    c.dimension = static_cast<int>(dn.unsigned_int());
    if (c.dimension < 1)
        dn.fail("must be >= 1");
    int const d = c.dimension;
    c.alpha = top.at("alpha").positive();

    auto const qn = top.at("quadruple");
    qn.keys({"gamma", "gamma0", "sigma", "levy_measure", "mixing_measure"});
    c.quad.nu = detail::parse_levy(qn.at("levy_measure"), d);
    if (auto a = c.quad.nu.alpha(); a && *a != c.alpha)
        top.at("alpha").fail("disagrees with the Lévy measure index");
    detail::EnvelopeOverrides ov;
    c.quad.pi = detail::parse_mixing(qn.at("mixing_measure"), d, ov);
    c.quad.Sigma = qn.has("sigma") ? qn.at("sigma").matrix(d, d) : Matrix(Matrix::Zero(d, d));
    if (qn.has("gamma") && qn.has("gamma0"))
        qn.fail("give either gamma or gamma0");
    c.quad.gamma = Vector::Zero(d);
    if (qn.has("gamma"))
        c.quad.gamma = qn.at("gamma").vector(d);
    else if (qn.has("gamma0"))
    {
        auto const g0n = qn.at("gamma0");
        if (!std::isfinite(c.quad.nu.abs_moment(1, 0, 1)))
            g0n.fail("gamma0 needs int_{||x|| <= 1} ||x|| nu(dx) < inf");
        c.quad.gamma = g0n.vector(d) + c.quad.nu.first_moment(0, 1);
    }
    detail::guarded(qn, [&] {
        c.quad.validate();
        return 0;
    });

    c.kernel = detail::parse_kernel(top.at("kernel"), d, ov);

    auto const gn = top.at("grid");
    gn.keys({"step", "times"});
    if (gn.has("step") == gn.has("times"))
        gn.fail("give exactly one of step or times");
    if (gn.has("step"))
    {
        double const step = gn.at("step").positive();
        c.grid = detail::guarded(gn.at("step"), [&] { return make_grid(step); });
    }
    else
    {
        auto const t = gn.at("times").numbers();
        c.grid = detail::guarded(gn.at("times"), [&] { return normalize_grid(t); });
    }

    if (top.has("ensemble"))
    {
        auto const en = top.at("ensemble");
        en.keys({"n_paths", "seed", "threads"});
        if (en.has("n_paths"))
            c.n_paths = en.at("n_paths").unsigned_int();
        if (en.has("seed"))
            c.seed = en.at("seed").unsigned_int();
        if (en.has("threads"))
            c.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, en.at("threads").unsigned_int()));
    }

    if (top.has("truncation"))
    {
        auto const tn = top.at("truncation");
        tn.keys({"eps", "s_max", "small_jumps", "gaussian_impulses_per_unit", "burn_in_tol"});
        if (tn.has("eps"))
            c.trunc.eps = tn.at("eps").positive();
        if (tn.has("s_max"))
            c.trunc.s_max = tn.at("s_max").positive();
        if (tn.has("small_jumps"))
        {
            auto const s = tn.at("small_jumps").string();
            if (s == "drop")
                c.trunc.small_jumps = SmallJumps::drop;
            else if (s == "gaussian")
                c.trunc.small_jumps = SmallJumps::gaussian;
            else
                tn.at("small_jumps").fail("expected 'drop' or 'gaussian'");
        }
        if (tn.has("gaussian_impulses_per_unit"))
            c.trunc.gaussian_rate = tn.at("gaussian_impulses_per_unit").positive();
        if (tn.has("burn_in_tol"))
            c.trunc.burn_in_tol = tn.at("burn_in_tol").positive();
    }

    if (top.has("tolerances"))
    {
        auto const tn = top.at("tolerances");
        tn.keys({"abs_tol", "rel_tol", "growth", "quad_abs_tol", "quad_rel_tol", "quad_max_depth", "regvar_delta",
                 "xt2_eps", "fd_ladder", "fd_factor"});
        auto& cs = c.cond;
        if (tn.has("abs_tol"))
            cs.abs_tol = tn.at("abs_tol").positive();
        if (tn.has("rel_tol"))
            cs.rel_tol = tn.at("rel_tol").positive();
        if (tn.has("growth"))
            cs.growth = tn.at("growth").positive();
        if (tn.has("quad_abs_tol"))
            cs.quad.abs_tol = tn.at("quad_abs_tol").positive();
        if (tn.has("quad_rel_tol"))
            cs.quad.rel_tol = tn.at("quad_rel_tol").positive();
        if (tn.has("quad_max_depth"))
            cs.quad.max_depth = static_cast<unsigned>(tn.at("quad_max_depth").unsigned_int());
        if (tn.has("regvar_delta"))
            cs.regvar_delta = tn.at("regvar_delta").positive();
        if (tn.has("xt2_eps"))
            cs.xt2_eps = tn.at("xt2_eps").positive();
        if (tn.has("fd_ladder"))
        {
            cs.fd_ladder = tn.at("fd_ladder").numbers();
            if (cs.fd_ladder.size() < 2)
                tn.at("fd_ladder").fail("needs at least two deltas");
            for (double v : cs.fd_ladder)
                if (!(v > 0 && v < 1))
                    tn.at("fd_ladder").fail("deltas must lie in (0, 1)");
        }
        if (tn.has("fd_factor"))
            cs.fd_factor = tn.at("fd_factor").positive();
    }

    if (top.has("estimate"))
    {
        auto const en = top.at("estimate");
        en.keys({"hill_k", "spectral_u", "relcomp", "mu_queries", "a_n", "scaling"});
        auto& e = c.estimate;
        if (en.has("hill_k"))
        {
            e.hill_k = en.at("hill_k").unsigned_int();
            if (*e.hill_k == 0)
                en.at("hill_k").fail("must be >= 1");
        }
        if (en.has("spectral_u"))
            e.spectral_u = en.at("spectral_u").positive();
        if (en.has("relcomp"))
        {
            auto const rn = en.at("relcomp");
            rn.keys({"eps", "deltas"});
            if (rn.has("eps"))
                e.relcomp_eps = rn.at("eps").positive();
            if (rn.has("deltas"))
            {
                e.relcomp_deltas = rn.at("deltas").numbers();
                for (double v : e.relcomp_deltas)
                    if (!(v > 0 && v <= 1))
                        rn.at("deltas").fail("deltas must lie in (0, 1]");
            }
        }
        if (en.has("mu_queries"))
        {
            auto const mn = en.at("mu_queries");
            e.mu_queries.clear();
            for (std::size_t i = 0; i < mn.size(); ++i)
                e.mu_queries.push_back(detail::parse_query(mn.at(i), c.kernel.rows));
        }
        if (en.has("a_n"))
            e.a_n = en.at("a_n").positive();
        if (en.has("scaling"))
        {
            auto const s = en.at("scaling").string();
            if (s == "power")
                e.power_scaling = true;
            else if (s != "limit_measure")
                en.at("scaling").fail("expected 'limit_measure' or 'power'");
        }
    }

    if (top.has("pointprocess"))
    {
        auto const pn = top.at("pointprocess");
        pn.keys({"a_n", "u", "shells", "blocks"});
        auto& p = c.pointprocess;
        if (pn.has("a_n"))
            p.a_n = pn.at("a_n").positive();
        if (pn.has("u"))
            p.u = pn.at("u").positive();
        if (pn.has("blocks"))
            p.blocks = pn.at("blocks").unsigned_int();
        if (pn.has("shells"))
        {
            auto const sn = pn.at("shells");
            p.shells.clear();
            for (std::size_t i = 0; i < sn.size(); ++i)
            {
                auto const v = sn.at(i).numbers();
                if (v.size() != 2)
                    sn.at(i).fail("shell is [lo, hi]");
                p.shells.push_back({v[0], v[1]});
            }
            detail::guarded(sn, [&] {
                validate_shells(p.shells);
                return 0;
            });
        }
    }

    if (top.has("output_dir"))
        c.output_dir = top.at("output_dir").string();
    if (top.has("format"))
    {
        auto const f = top.at("format").string();
        if (f == "csv")
            c.format = PathFormat::csv;
        else if (f == "binary")
            c.format = PathFormat::binary;
        else
            top.at("format").fail("expected 'csv' or 'binary'");
    }

    Json canon = root;
    // Ensemble block with defaults filled in, so that omitted and explicit defaults agree.
    canon["ensemble"] = Json{{"n_paths", c.n_paths}, {"seed", c.seed}};
    canon.erase("output_dir");
    c.canonical = canon.dump();
    c.checksum = fnv1a64(c.canonical);
    return c;
}

//! Applies a seed override; the checksum covers the effective seed.
inline void override_seed(ExperimentConfig& c, std::uint64_t seed)
{
    c.seed = seed;
    Json canon = Json::parse(c.canonical);
    canon["ensemble"]["seed"] = seed;
    c.canonical = canon.dump();
    c.checksum = fnv1a64(c.canonical);
}

inline ExperimentConfig load_config(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("", 0, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace mmasim

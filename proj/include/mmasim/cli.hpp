// SPDX-License-Identifier: Apache-2.0
//! \file cli.hpp
//! Subcommands of the experiment runner. Each returns the process exit status:
//! 0 all pass, 1 invalid config, 2 a condition fails or diverges, 3 inconclusive,
//! 4 I/O error or corrupt / mismatched file.
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "conditions.hpp"
#include "config.hpp"
#include "paths.hpp"
#include "pointproc.hpp"
#include "records.hpp"
#include "simulate.hpp"
#include "tails.hpp"

namespace mmasim::cli {

namespace fs = std::filesystem;

enum Exit : int
{
    ok = 0,
    invalid_config = 1,
    failed = 2,
    inconclusive = 3,
    io_error = 4
};

struct Options
{
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    bool force = false;
    std::optional<unsigned> threads;
    std::optional<std::string> paths;  //!< directory holding a simulate manifest (defaults to the output dir)
};

class IoError : public std::runtime_error
{
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string read_file(fs::path const& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(fs::path const& p, std::string const& bytes)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + p.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out)
        throw IoError("write failed for " + p.string());
}

inline fs::path prepare_dir(fs::path const& d)
{
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec || !fs::is_directory(d))
        throw IoError("cannot create directory " + d.string());
    return d;
}

struct Loaded
{
    ExperimentConfig cfg;
    fs::path out;
    unsigned threads = 1;
};

inline Loaded load(Options const& o)
{
    Loaded l{load_config(o.config), {}, 1};
    if (o.seed)
        override_seed(l.cfg, *o.seed);
    l.out = o.out ? fs::path(*o.out) : fs::path(l.cfg.output_dir);
    l.threads = o.threads ? std::max(1u, *o.threads) : l.cfg.threads;
    return l;
}

//! Wraps a subcommand body with the exit-status mapping of the error classes.
template <class F>
int run(std::ostream& log, F&& body)
{
    try
    {
        return body();
    }
    catch (ConfigError const& e)
    {
        log << "error: " << e.what() << "\n";
        return invalid_config;
    }
    catch (IoError const& e)
    {
        log << "error: " << e.what() << "\n";
        return io_error;
    }
    catch (FormatError const& e)
    {
        log << "error: " << e.what() << "\n";
        return io_error;
    }
    catch (PreconditionError const& e)
    {
        log << "error: " << e.what() << ":";
        for (auto const& id : e.failing_conditions())
            log << " " << id;
        log << " (use --force to simulate anyway)\n";
        return failed;
    }
    catch (DomainError const& e)
    {
        log << "error: " << e.what() << "\n";
        return invalid_config;
    }
}

inline std::string path_file_name(std::size_t i, PathFormat f)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "path_%06zu.%s", i, f == PathFormat::csv ? "csv" : "bin");
    return buf;
}

inline std::string serialize_path(CadlagPath const& p, ExperimentConfig const& c)
{
    std::ostringstream os(std::ios::binary);
    if (c.format == PathFormat::csv)
        write_path_csv(os, p, hex64(c.checksum));
    else
        write_path_binary(os, p, c.checksum);
    return os.str();
}

//! Reads the ensemble listed in a simulate manifest, verifying every checksum.
inline std::vector<CadlagPath> load_ensemble(ExperimentConfig const& c, fs::path const& dir)
{
    auto const mpath = dir / "manifest.json";
    Json man;
    try
    {
        man = Json::parse(read_file(mpath));
    }
    catch (nlohmann::json::exception const& e)
    {
        throw IoError(mpath.string() + ": corrupt manifest (" + e.what() + ")");
    }
    try
    {
        if (man.at("config_checksum").get<std::string>() != hex64(c.checksum))
            throw IoError(mpath.string() + ": produced by a different configuration (checksum " +
                          man.at("config_checksum").get<std::string>() + ", expected " + hex64(c.checksum) + ")");
        std::vector<CadlagPath> out;
        for (auto const& f : man.at("files"))
        {
            auto const name = f.at("name").get<std::string>();
            auto const file = dir / "paths" / name;
            auto const bytes = read_file(file);
            if (hex64(fnv1a64(bytes)) != f.at("checksum").get<std::string>())
                throw IoError(file.string() + ": file checksum mismatch (corrupt path file)");
            std::istringstream is(bytes, std::ios::binary);
            if (name.size() > 4 && name.substr(name.size() - 4) == ".bin")
            {
                auto r = read_path_binary(is, file.string());
                if (r.checksum != c.checksum)
                    throw IoError(file.string() + ": produced by a different configuration");
                out.push_back(std::move(r.path));
            }
            else
            {
                auto r = read_path_csv(is, file.string());
                if (r.checksum != hex64(c.checksum))
                    throw IoError(file.string() + ": produced by a different configuration");
                out.push_back(std::move(r.path));
            }
        }
        return out;
    }
    catch (nlohmann::json::exception const& e)
    {
        throw IoError(mpath.string() + ": corrupt manifest (" + e.what() + ")");
    }
}

//! a_n from the config override, else from the limit measure (or the driver tail constant).
inline std::pair<double, std::string> scaling(ExperimentConfig const& c, std::optional<double> override_a, double n)
{
    if (override_a)
        return {*override_a, "config"};
    if (c.quad.nu.is_discrete())
        return {1.0, "unit (driver not regularly varying)"};
    if (c.estimate.power_scaling)
        return {power_scaling(c.quad, n), "power"};
    return {default_scaling(c.quad, c.kernel, n), "limit_measure"};
}

inline Json query_json(SetQuery const& q)
{
    Json j;
    if (q.kind == SetQuery::Kind::radial)
        j["r"] = q.r;
    else
    {
        j["lo"] = vec(q.lo);
        j["hi"] = vec(q.hi);
    }
    j["times"] = q.times;
    return j;
}

inline int verdict_status(std::vector<ConditionReport> const& rs)
{
    bool any_incon = false;
    for (auto const& r : rs)
    {
        if (r.verdict == Verdict::fail || r.verdict == Verdict::divergent)
            return failed;
        any_incon = any_incon || r.verdict == Verdict::inconclusive;
    }
    return any_incon ? inconclusive : ok;
}

}  // namespace detail

//! Every condition report that applies to the configuration, in a fixed order.
inline std::vector<ConditionReport> applicable_reports(ExperimentConfig const& c)
{
    auto const& q = c.quad;
    auto const& k = c.kernel;
    std::vector<ConditionReport> all = check_existence(q, k, c.cond);
    all.push_back(check_regvar_sufficient(q, k, c.alpha, c.cond));
    all.push_back(check_xt2(q, k, c.alpha, c.cond));
    all.push_back(check_fdelta_vanishing(k, q.pi, c.alpha, c.cond));
    if (k.family == KernelFamily::supou)
        for (auto& r : check_supou(q, k, c.alpha, c.cond))
            all.push_back(std::move(r));
    std::vector<ConditionReport> out;
    for (auto& r : all)
        if (r.verdict != Verdict::not_applicable && !r.implied)
            out.push_back(std::move(r));
    return out;
}

inline int cmd_check(Options const& o, std::ostream& log = std::cerr)
{
    return detail::run(log, [&] {
        auto l = detail::load(o);
        auto const reports = applicable_reports(l.cfg);
        auto const sum = hex64(l.cfg.checksum);
        RecordWriter rep;
        RecordWriter tim;
        for (auto const& r : reports)
        {
            auto j = to_json(r);
            j["config_checksum"] = sum;
            rep.add(j);
            tim.add(Json{{"id", r.id}, {"wall_time_s", r.wall_time}, {"config_checksum", sum}});
            log << r.id << ": " << to_string(r.verdict) << "\n";
        }
        log << nondegeneracy(l.cfg.quad, l.cfg.kernel) << "\n";
        detail::prepare_dir(l.out);
        detail::write_file(l.out / "check_report.jsonl", rep.str());
        detail::write_file(l.out / "check_timings.jsonl", tim.str());
        return detail::verdict_status(reports);
    });
}

inline int cmd_simulate(Options const& o, std::ostream& log = std::cerr)
{
    return detail::run(log, [&] {
        auto l = detail::load(o);
        auto const& c = l.cfg;
        auto const m = make_model(c.quad, c.kernel, c.trunc, o.force, c.cond);
        for (auto const& w : m.warnings)
            log << "warning: " << w << "\n";
        auto const pdir = detail::prepare_dir(l.out / "paths");
        Json files = Json::array();
        std::size_t const chunk = 256;
        for (std::size_t start = 0; start < c.n_paths; start += chunk)
        {
            std::size_t const len = std::min(chunk, c.n_paths - start);
            std::vector<std::string> bytes(len);
            parallel_for(len, l.threads, [&](std::size_t i) {
                auto const cloud = replica_cloud(m, c.seed, start + i);
                bytes[i] = detail::serialize_path(path_direct(cloud, m, c.grid), c);
            });
            for (std::size_t i = 0; i < len; ++i)
            {
                auto const name = detail::path_file_name(start + i, c.format);
                detail::write_file(pdir / name, bytes[i]);
                files.push_back(Json{{"name", name}, {"checksum", hex64(fnv1a64(bytes[i]))}});
            }
        }
        Json man;
        man["format"] = "mmasim-manifest v1";
        man["config_checksum"] = hex64(c.checksum);
        man["seed"] = c.seed;
        man["n_paths"] = c.n_paths;
        man["grid_points"] = c.grid.size();
        man["path_format"] = c.format == PathFormat::csv ? "csv" : "binary";
        man["eps"] = c.trunc.eps;
        man["small_jumps"] = c.trunc.small_jumps == SmallJumps::drop ? "drop" : "gaussian";
        man["s_max"] = num(m.s_max);
        man["burn_in_bound"] = num(m.burn_in_bound);
        man["window"] = Json::array({num(m.window_lo), num(m.window_hi)});
        man["jump_rate"] = num(m.jump_rate);
        man["drift"] = vec(m.drift);
        man["drift_term"] = vec(m.drift_term);
        man["warnings"] = m.warnings;
        man["files"] = files;
        detail::write_file(l.out / "manifest.json", man.dump(2) + "\n");
        log << "wrote " << c.n_paths << " paths to " << pdir.string() << "\n";
        return static_cast<int>(ok);
    });
}

inline int cmd_estimate(Options const& o, std::ostream& log = std::cerr)
{
    return detail::run(log, [&] {
        auto l = detail::load(o);
        auto const& c = l.cfg;
        auto const dir = o.paths ? fs::path(*o.paths) : l.out;
        auto const paths = detail::load_ensemble(c, dir);
        auto const sum = hex64(c.checksum);
        RecordWriter rep;
        auto add = [&](Json j) {
            j["config_checksum"] = sum;
            rep.add(j);
        };
        detail::prepare_dir(l.out);
        if (paths.empty())
        {
            add({{"record", "summary"}, {"verdict", "inconclusive"}, {"reason", "empty path set"}});
            detail::write_file(l.out / "estimate_report.jsonl", rep.str());
            log << "inconclusive: empty path set\n";
            return static_cast<int>(inconclusive);
        }
        double const n = static_cast<double>(paths.size());
        auto const [a_n, method] = detail::scaling(c, c.estimate.a_n, n);
        add({{"record", "scaling"}, {"n", paths.size()}, {"a_n", num(a_n)}, {"method", method}});

        bool any_incon = false;
        auto hill_record = [&](std::string const& sample, std::vector<double> v) {
            std::erase_if(v, [](double x) { return !(x > 0); });
            std::size_t const k = c.estimate.hill_k.value_or(default_hill_k(v.size()));
            Json j{{"record", "hill"}, {"sample", sample}};
            try
            {
                auto const t = hill(v, k);
                j["alpha_hat"] = num(t.alpha_hat);
                j["k"] = t.k;
                j["n"] = t.n;
                j["stderr"] = num(t.stderr_);
                j["threshold"] = num(t.threshold);
            }
            catch (DomainError const& e)
            {
                any_incon = true;
                j["verdict"] = "inconclusive";
                j["reason"] = e.what();
                j["k"] = k;
                j["n"] = v.size();
            }
            add(j);
        };
        std::vector<double> marg;
        std::vector<double> sups;
        for (auto const& p : paths)
        {
            marg.push_back(p.values().front().norm());
            sups.push_back(sup_norm(p).value);
        }
        hill_record("marginal_norm_t0", marg);
        hill_record("sup_norm", sups);

        auto const spec = spectral_harvest(paths, c.estimate.spectral_u * a_n);
        add({{"record", "spectral"}, {"u", c.estimate.spectral_u}, {"count", spec.size()}});
        std::ostringstream sc;
        sc << "# mmasim-spectral v1 config=" << sum << "\n";
        sc << "index,radius,argmax_time";
        for (int i = 1; i <= c.kernel.rows; ++i)
            sc << ",theta" << i;
        sc << "\n";
        for (auto const& s : spec)
        {
            sc << s.index << "," << mmasim::detail::format_double(s.radius / a_n) << ","
               << mmasim::detail::format_double(s.argmax_time);
            for (Eigen::Index i = 0; i < s.direction_at_max.size(); ++i)
                sc << "," << mmasim::detail::format_double(s.direction_at_max(i));
            sc << "\n";
        }

        for (double delta : c.estimate.relcomp_deltas)
        {
            auto const r = relcomp_diagnostics(paths, a_n, c.estimate.relcomp_eps, delta);
            add({{"record", "relcomp"},
                 {"eps", c.estimate.relcomp_eps},
                 {"delta", delta},
                 {"n", r.n},
                 {"w_start", num(r.rate[0])},
                 {"w_start_se", num(r.stderr_[0])},
                 {"w_end", num(r.rate[1])},
                 {"w_end_se", num(r.stderr_[1])},
                 {"w2", num(r.rate[2])},
                 {"w2_se", num(r.stderr_[2])}});
        }

        std::ostringstream mt;
        mt << "# mmasim-mu-table v1 config=" << sum << "\n";
        mt << "query,empirical,empirical_sigma,count,theoretical,theoretical_error,expected\n";
        for (std::size_t qi = 0; qi < c.estimate.mu_queries.size(); ++qi)
        {
            auto const& q = c.estimate.mu_queries[qi];
            std::vector<Vector> ms;
            ms.reserve(paths.size());
            for (auto const& p : paths)
                ms.push_back(path_marginal(p, q.times));
            auto const emp = empirical_tail_measure(ms, a_n, q);
            Json j{{"record", "mu_x"}, {"query", detail::query_json(q)}, {"empirical", num(emp.value)},
                   {"empirical_sigma", num(emp.stderr_)}, {"count", emp.count}};
            double th = kNaN;
            double te = kNaN;
            double ex = kNaN;
            if (!c.quad.nu.is_discrete())
            {
                auto const t = mu_x_query(c.quad, c.kernel, q);
                th = t.value;
                te = t.error_bound;
                // n P(a_n^{-1} X in B) ~ n a_n^{-alpha} mu_X(B) by homogeneity
                ex = n * std::pow(a_n, -c.quad.nu.law().alpha) * th;
            }
            j["theoretical"] = num(th);
            j["theoretical_error"] = num(te);
            j["expected"] = num(ex);
            add(j);
            mt << qi << "," << mmasim::detail::format_double(emp.value) << ","
               << mmasim::detail::format_double(emp.stderr_) << "," << emp.count << ","
               << mmasim::detail::format_double(th) << "," << mmasim::detail::format_double(te) << ","
               << mmasim::detail::format_double(ex) << "\n";
        }
        add({{"record", "summary"}, {"verdict", any_incon ? "inconclusive" : "pass"}});
        detail::write_file(l.out / "estimate_report.jsonl", rep.str());
        detail::write_file(l.out / "spectral_samples.csv", sc.str());
        detail::write_file(l.out / "mu_table.csv", mt.str());
        return static_cast<int>(any_incon ? inconclusive : ok);
    });
}

inline int cmd_pointprocess(Options const& o, std::ostream& log = std::cerr)
{
    return detail::run(log, [&] {
        auto l = detail::load(o);
        auto const& c = l.cfg;
        auto const dir = o.paths ? fs::path(*o.paths) : l.out;
        auto const paths = detail::load_ensemble(c, dir);
        auto const sum = hex64(c.checksum);
        RecordWriter rep;
        auto add = [&](Json j) {
            j["config_checksum"] = sum;
            rep.add(j);
        };
        detail::prepare_dir(l.out);
        if (paths.empty())
        {
            add({{"record", "summary"}, {"verdict", "inconclusive"}, {"reason", "empty path set"}});
            detail::write_file(l.out / "pp_diagnostics.jsonl", rep.str());
            log << "inconclusive: empty path set\n";
            return static_cast<int>(inconclusive);
        }
        auto const [a_n, method] = detail::scaling(c, c.pointprocess.a_n, static_cast<double>(paths.size()));
        auto const pp = build_point_process(paths, a_n, c.pointprocess.u);
        auto const diag = poisson_limit_diagnostics(pp, c.pointprocess.shells, c.pointprocess.blocks);

        std::ostringstream pts;
        pts << "# mmasim-points v1 config=" << sum << "\n";
        pts << "replica,radius,argmax_time";
        for (int i = 1; i <= c.kernel.rows; ++i)
            pts << ",theta" << i;
        pts << "\n";
        for (auto const& p : pp.points)
        {
            pts << p.replica << "," << mmasim::detail::format_double(p.radius) << ","
                << mmasim::detail::format_double(p.argmax_time);
            for (Eigen::Index i = 0; i < p.direction.size(); ++i)
                pts << "," << mmasim::detail::format_double(p.direction(i));
            pts << "\n";
        }
        add({{"record", "summary"},
             {"n", pp.n},
             {"a_n", num(a_n)},
             {"scaling", method},
             {"u", pp.u},
             {"points", pp.points.size()},
             {"blocks", diag.blocks},
             {"sufficient", diag.sufficient},
             {"reason", diag.reason}});
        for (auto const& cell : diag.cells)
            add({{"record", "shell"},
                 {"lo", cell.shell.lo},
                 {"hi", cell.shell.hi},
                 {"count", cell.count},
                 {"block_mean", num(cell.block_mean)},
                 {"block_variance", num(cell.block_variance)},
                 {"dispersion", num(cell.dispersion)},
                 {"chi_square", num(cell.chi_square)},
                 {"dof", cell.dof},
                 {"p_value", num(cell.p_value)}});
        if (!diag.correlation.empty())
        {
            Json m = Json::array();
            for (auto const& row : diag.correlation)
            {
                Json r = Json::array();
                for (double v : row)
                    r.push_back(num(v));
                m.push_back(r);
            }
            add({{"record", "correlation"}, {"matrix", m}});
        }
        detail::write_file(l.out / "points.csv", pts.str());
        detail::write_file(l.out / "pp_diagnostics.jsonl", rep.str());
        log << pp.points.size() << " exceedance points\n";
        return static_cast<int>(ok);
    });
}

}  // namespace mmasim::cli

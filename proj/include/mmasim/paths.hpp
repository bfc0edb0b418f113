// SPDX-License-Identifier: Apache-2.0
//! \file paths.hpp
//! Càdlàg paths on [0, 1] stored as grid samples plus an exact jump list,
//! with sup-norm, the oscillation moduli w and w'' and the path file formats.
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"

namespace mmasim {

//! Malformed or inconsistent path data.
class FormatError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct JumpRecord
{
    double time = 0;
    Vector left;
    Vector right;
};

//! One element of the event set: a stored value or a left limit at a time.
struct PathEvent
{
    double time = 0;
    Vector value;
    bool left = false;
};

class CadlagPath
{
  public:
    CadlagPath() = default;

    CadlagPath(std::vector<double> grid, std::vector<Vector> values, std::vector<JumpRecord> jumps = {})
        : grid_(std::move(grid)), values_(std::move(values)), jumps_(std::move(jumps))
    {
        validate();
    }

    //! Zero path of dimension n on a grid.
    static CadlagPath zero(std::vector<double> grid, int n)
    {
        std::vector<Vector> v(grid.size(), Vector::Zero(n));
        return CadlagPath(std::move(grid), std::move(v));
    }

    std::vector<double> const& grid() const { return grid_; }
    std::vector<Vector> const& values() const { return values_; }
    std::vector<JumpRecord> const& jumps() const { return jumps_; }
    int dim() const { return values_.empty() ? 0 : static_cast<int>(values_.front().size()); }

    void validate() const
    {
        if (grid_.size() < 2 || grid_.front() != 0 || grid_.back() != 1)
            throw DomainError("path grid must start at 0 and end at 1");
        for (std::size_t i = 1; i < grid_.size(); ++i)
            if (!(grid_[i] > grid_[i - 1]))
                throw DomainError("path grid must be strictly increasing");
        if (values_.size() != grid_.size())
            throw DomainError("path values do not match the grid");
        auto const n = values_.front().size();
        for (auto const& v : values_)
            if (v.size() != n)
                throw DomainError("path values differ in dimension");
        for (std::size_t i = 0; i < jumps_.size(); ++i)
        {
            auto const& j = jumps_[i];
            if (!(j.time > 0 && j.time <= 1))
                throw DomainError("jump time outside (0, 1]");
            if (i > 0 && !(j.time > jumps_[i - 1].time))
                throw DomainError("jump times must be strictly increasing");
            if (j.left.size() != n || j.right.size() != n || !j.left.allFinite())
                throw DomainError("jump record has invalid values");
        }
    }

    //! Grid values and jump limits merged in time order; at a jump time the
    //! left limit precedes the right value, and a grid sample at a jump time
    //! is not repeated.
    std::vector<PathEvent> events() const
    {
        std::vector<PathEvent> out;
        out.reserve(grid_.size() + 2 * jumps_.size());
        std::size_t j = 0;
        for (std::size_t i = 0; i < grid_.size(); ++i)
        {
            double const t = grid_[i];
            while (j < jumps_.size() && jumps_[j].time < t)
            {
                out.push_back({jumps_[j].time, jumps_[j].left, true});
                out.push_back({jumps_[j].time, jumps_[j].right, false});
                ++j;
            }
            if (j < jumps_.size() && jumps_[j].time == t)
            {
                out.push_back({t, jumps_[j].left, true});
                out.push_back({t, values_[i], false});
                ++j;
                continue;
            }
            out.push_back({t, values_[i], false});
        }
        return out;
    }

    CadlagPath operator-(CadlagPath const& o) const
    {
        check_aligned(o);
        CadlagPath r = *this;
        for (std::size_t i = 0; i < values_.size(); ++i)
            r.values_[i] -= o.values_[i];
        for (std::size_t i = 0; i < jumps_.size(); ++i)
        {
            r.jumps_[i].left -= o.jumps_[i].left;
            r.jumps_[i].right -= o.jumps_[i].right;
        }
        return r;
    }

    CadlagPath operator+(CadlagPath const& o) const
    {
        check_aligned(o);
        CadlagPath r = *this;
        for (std::size_t i = 0; i < values_.size(); ++i)
            r.values_[i] += o.values_[i];
        for (std::size_t i = 0; i < jumps_.size(); ++i)
        {
            r.jumps_[i].left += o.jumps_[i].left;
            r.jumps_[i].right += o.jumps_[i].right;
        }
        return r;
    }

    CadlagPath scaled(double c) const
    {
        CadlagPath r = *this;
        for (auto& v : r.values_)
            v *= c;
        for (auto& j : r.jumps_)
        {
            j.left *= c;
            j.right *= c;
        }
        return r;
    }

    bool operator==(CadlagPath const& o) const
    {
        if (grid_ != o.grid_ || values_.size() != o.values_.size() || jumps_.size() != o.jumps_.size())
            return false;
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (values_[i] != o.values_[i])
                return false;
        for (std::size_t i = 0; i < jumps_.size(); ++i)
            if (jumps_[i].time != o.jumps_[i].time || jumps_[i].left != o.jumps_[i].left ||
                jumps_[i].right != o.jumps_[i].right)
                return false;
        return true;
    }

  private:
    void check_aligned(CadlagPath const& o) const
    {
        if (grid_ != o.grid_ || jumps_.size() != o.jumps_.size())
            throw DomainError("paths are not aligned");
        for (std::size_t i = 0; i < jumps_.size(); ++i)
            if (jumps_[i].time != o.jumps_[i].time)
                throw DomainError("paths are not aligned");
    }

    std::vector<double> grid_;
    std::vector<Vector> values_;
    std::vector<JumpRecord> jumps_;
};

struct SupNorm
{
    double value = 0;
    double argmax = 0;
    bool at_left_limit = false;
};

//! sup_t ||x_t|| over stored values and left limits; earliest maximizer, left limit first.
inline SupNorm sup_norm(CadlagPath const& p)
{
    SupNorm out;
    bool first = true;
    for (auto const& e : p.events())
    {
        double const n = e.value.norm();
        if (first || n > out.value)
        {
            out = {n, e.time, e.left};
            first = false;
        }
    }
    return out;
}

//! Time set T0 = [lo, hi] or [lo, hi).
struct TimeSet
{
    double lo = 0;
    double hi = 1;
    bool hi_closed = true;

    bool holds_value(double t) const { return t >= lo && (hi_closed ? t <= hi : t < hi); }
    //! A left limit at t is approached from inside T0.
    bool holds_left(double t) const { return t > lo && t <= hi; }
};

//! w(x, T0) = sup_{t1, t2 in T0} ||x_{t1} - x_{t2}||.
inline double modulus_w(CadlagPath const& p, TimeSet const& t0)
{
    if (!(t0.hi > t0.lo) && !(t0.hi == t0.lo && t0.hi_closed))
        return 0;
    std::vector<Vector const*> pts;
    auto const ev = p.events();
    for (auto const& e : ev)
        if (e.left ? t0.holds_left(e.time) : t0.holds_value(e.time))
            pts.push_back(&e.value);
    if (pts.size() < 2)
        return 0;
    if (p.dim() == 1)
    {
        double mn = (*pts[0])(0);
        double mx = mn;
        for (auto const* v : pts)
        {
            mn = std::min(mn, (*v)(0));
            mx = std::max(mx, (*v)(0));
        }
        return mx - mn;
    }
    double best = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j)
            best = std::max(best, (*pts[i] - *pts[j]).norm());
    return best;
}

//! w''(x, delta) = sup over t1 <= t <= t2, t2 - t1 <= delta of
//! min(||x_t - x_{t1}||, ||x_{t2} - x_t||), over the event set.
inline double modulus_wpp(CadlagPath const& p, double delta)
{
    if (!(delta >= 0 && delta <= 1))
        throw DomainError("modulus_wpp: delta must lie in [0, 1]");
    auto const ev = p.events();
    auto const m = ev.size();
    double best = 0;
    std::vector<double> reach;  // prefix max of ||x_{k2} - x_k|| for k2 >= k
    for (std::size_t k = 0; k < m; ++k)
    {
        std::size_t hi = k;
        while (hi + 1 < m && ev[hi + 1].time - ev[k].time <= delta)
            ++hi;
        reach.assign(hi - k + 1, 0.0);
        double run = 0;
        for (std::size_t k2 = k; k2 <= hi; ++k2)
        {
            run = std::max(run, (ev[k2].value - ev[k].value).norm());
            reach[k2 - k] = run;
        }
        if (run <= best)
            continue;
        std::size_t top = hi;
        for (std::size_t k1 = k + 1; k1-- > 0;)
        {
            if (ev[k].time - ev[k1].time > delta)
                break;
            while (top > k && ev[top].time - ev[k1].time > delta)
                --top;
            double const a = (ev[k].value - ev[k1].value).norm();
            best = std::max(best, std::min(a, reach[top - k]));
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Path files

namespace detail {

inline std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline double parse_double(std::string const& s, std::string const& what)
{
    char* end = nullptr;
    double const v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size())
        throw FormatError("invalid number '" + s + "' in " + what);
    return v;
}

inline std::vector<std::string> split(std::string const& line, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep))
        out.push_back(cur);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

}  // namespace detail

//! Delimited text: one row per grid time (is_jump = 0) and per jump (is_jump = 1,
//! coordinates hold the right value, left* columns the left limit).
inline void write_path_csv(std::ostream& os, CadlagPath const& p, std::string const& checksum)
{
    int const n = p.dim();
    os << "# mmasim-path v1 config=" << checksum << "\n";
    os << "time";
    for (int i = 1; i <= n; ++i)
        os << ",x" << i;
    os << ",is_jump";
    for (int i = 1; i <= n; ++i)
        os << ",left" << i;
    os << "\n";
    auto row = [&](double t, Vector const& v, bool jump, Vector const& l) {
        os << detail::format_double(t);
        for (int i = 0; i < n; ++i)
            os << "," << detail::format_double(v(i));
        os << "," << (jump ? 1 : 0);
        for (int i = 0; i < n; ++i)
            os << "," << detail::format_double(l(i));
        os << "\n";
    };
    std::size_t j = 0;
    auto const& jumps = p.jumps();
    for (std::size_t i = 0; i < p.grid().size(); ++i)
    {
        double const t = p.grid()[i];
        while (j < jumps.size() && jumps[j].time < t)
        {
            row(jumps[j].time, jumps[j].right, true, jumps[j].left);
            ++j;
        }
        row(t, p.values()[i], false, p.values()[i]);
        if (j < jumps.size() && jumps[j].time == t)
        {
            row(t, jumps[j].right, true, jumps[j].left);
            ++j;
        }
    }
}

struct PathFile
{
    CadlagPath path;
    std::string checksum;
};

inline PathFile read_path_csv(std::istream& is, std::string const& name = "path file")
{
    std::string line;
    if (!std::getline(is, line) || line.rfind("# mmasim-path v1 config=", 0) != 0)
        throw FormatError(name + ": missing header");
    PathFile out;
    out.checksum = line.substr(std::string("# mmasim-path v1 config=").size());
    if (!std::getline(is, line))
        throw FormatError(name + ": missing column line");
    auto const cols = detail::split(line, ',');
    if (cols.size() < 4 || (cols.size() - 2) % 2 != 0 || cols[0] != "time")
        throw FormatError(name + ": bad column line");
    auto const n = static_cast<int>((cols.size() - 2) / 2);
    std::vector<double> grid;
    std::vector<Vector> values;
    std::vector<JumpRecord> jumps;
    std::size_t lineno = 2;
    while (std::getline(is, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        auto const f = detail::split(line, ',');
        std::string const where = name + " line " + std::to_string(lineno);
        if (f.size() != cols.size())
            throw FormatError(where + ": wrong field count");
        double const t = detail::parse_double(f[0], where);
        Vector v(n);
        Vector l(n);
        for (int i = 0; i < n; ++i)
        {
            v(i) = detail::parse_double(f[1 + i], where);
            l(i) = detail::parse_double(f[2 + n + i], where);
        }
        if (f[1 + n] == "1")
            jumps.push_back({t, l, v});
        else if (f[1 + n] == "0")
        {
            grid.push_back(t);
            values.push_back(v);
        }
        else
            throw FormatError(where + ": is_jump must be 0 or 1");
    }
    try
    {
        out.path = CadlagPath(std::move(grid), std::move(values), std::move(jumps));
    }
    catch (DomainError const& e)
    {
        throw FormatError(name + ": " + e.what());
    }
    return out;
}

//! Binary block: "MMAP", u32 version, u32 dim, u64 grid length, u64 jump count,
//! u64 checksum, then grid (t, x) records and jump (t, left, right) records,
//! all little-endian 64-bit.
inline void write_path_binary(std::ostream& os, CadlagPath const& p, std::uint64_t checksum)
{
    static_assert(std::endian::native == std::endian::little, "binary path format assumes a little-endian host");
    auto put = [&](auto v) { os.write(reinterpret_cast<char const*>(&v), sizeof v); };
    os.write("MMAP", 4);
    put(std::uint32_t{1});
    put(static_cast<std::uint32_t>(p.dim()));
    put(static_cast<std::uint64_t>(p.grid().size()));
    put(static_cast<std::uint64_t>(p.jumps().size()));
    put(checksum);
    for (std::size_t i = 0; i < p.grid().size(); ++i)
    {
        put(p.grid()[i]);
        for (int k = 0; k < p.dim(); ++k)
            put(p.values()[i](k));
    }
    for (auto const& j : p.jumps())
    {
        put(j.time);
        for (int k = 0; k < p.dim(); ++k)
            put(j.left(k));
        for (int k = 0; k < p.dim(); ++k)
            put(j.right(k));
    }
}

struct BinaryPathFile
{
    CadlagPath path;
    std::uint64_t checksum = 0;
};

inline BinaryPathFile read_path_binary(std::istream& is, std::string const& name = "path file")
{
    auto get = [&](auto& v) {
        if (!is.read(reinterpret_cast<char*>(&v), sizeof v))
            throw FormatError(name + ": truncated binary block");
    };
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "MMAP", 4) != 0)
        throw FormatError(name + ": bad magic");
    std::uint32_t version = 0;
    std::uint32_t dim = 0;
    std::uint64_t ng = 0;
    std::uint64_t nj = 0;
    BinaryPathFile out;
    get(version);
    get(dim);
    get(ng);
    get(nj);
    get(out.checksum);
    if (version != 1 || dim == 0 || ng < 2 || ng > (1u << 28) || nj > (1u << 28))
        throw FormatError(name + ": bad binary header");
    std::vector<double> grid(ng);
    std::vector<Vector> values(ng, Vector(dim));
    for (std::uint64_t i = 0; i < ng; ++i)
    {
        get(grid[i]);
        for (std::uint32_t k = 0; k < dim; ++k)
            get(values[i](k));
    }
    std::vector<JumpRecord> jumps(nj);
    for (auto& j : jumps)
    {
        j.left.resize(dim);
        j.right.resize(dim);
        get(j.time);
        for (std::uint32_t k = 0; k < dim; ++k)
            get(j.left(k));
        for (std::uint32_t k = 0; k < dim; ++k)
            get(j.right(k));
    }
    try
    {
        out.path = CadlagPath(std::move(grid), std::move(values), std::move(jumps));
    }
    catch (DomainError const& e)
    {
        throw FormatError(name + ": " + e.what());
    }
    return out;
}

}  // namespace mmasim

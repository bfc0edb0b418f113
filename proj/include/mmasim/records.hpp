// SPDX-License-Identifier: Apache-2.0
//! \file records.hpp
//! Checksums and structured text records (one JSON object per line).
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "conditions.hpp"
#include "core.hpp"

namespace mmasim {

using Json = nlohmann::ordered_json;

//! 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string const& bytes, std::uint64_t h = 14695981039346656037ull)
{
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::uint64_t parse_hex64(std::string const& s)
{
    if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
        throw DomainError("malformed checksum '" + s + "'");
    return std::stoull(s, nullptr, 16);
}

//! Non-finite numbers become strings so that records stay valid JSON.
inline Json num(double x)
{
    if (std::isfinite(x))
        return x;
    if (std::isnan(x))
        return "nan";
    return x > 0 ? "inf" : "-inf";
}

inline Json vec(Vector const& v)
{
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        a.push_back(num(v(i)));
    return a;
}

inline Json to_json(ConditionReport const& r)
{
    Json j;
    j["id"] = r.id;
    j["verdict"] = to_string(r.verdict);
    j["value"] = num(r.value);
    j["error_bound"] = num(r.error_bound);
    j["tolerance"] = num(r.tolerance);
    if (!r.clause.empty())
        j["clause"] = r.clause;
    if (!r.details.empty())
        j["details"] = r.details;
    if (!r.partials.empty())
    {
        Json p = Json::array();
        for (double v : r.partials)
            p.push_back(num(v));
        j["partials"] = p;
    }
    return j;
}

//! Writes records as JSON lines and keeps the bytes for checksumming.
class RecordWriter
{
  public:
    void add(Json const& j) { buf_ << j.dump() << '\n'; }
    std::string str() const { return buf_.str(); }

  private:
    std::ostringstream buf_;
};

}  // namespace mmasim

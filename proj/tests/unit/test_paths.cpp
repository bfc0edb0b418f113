#include <gtest/gtest.h>

#include <mmasim/paths.hpp>
#include <mmasim/random.hpp>

#include <sstream>

using namespace mmasim;

namespace {

Vector v1(double x)
{
    return Vector::Constant(1, x);
}

//! Values 0 on [0, 0.3), 2 on [0.3, 0.5), -1 from 0.5 on; grid {0, 0.5, 1} so 0.5 is a jump on the grid.
CadlagPath sample_path()
{
    return CadlagPath({0, 0.5, 1}, {v1(0), v1(-1), v1(-1)}, {{0.3, v1(0), v1(2)}, {0.5, v1(2), v1(-1)}});
}

}  // namespace

TEST(Paths, EventsPutLeftLimitsFirst)
{
    auto const ev = sample_path().events();
    ASSERT_EQ(ev.size(), 6u);
    EXPECT_EQ(ev[0].time, 0);
    EXPECT_EQ(ev[1].time, 0.3);
    EXPECT_TRUE(ev[1].left);
    EXPECT_EQ(ev[1].value(0), 0);
    EXPECT_FALSE(ev[2].left);
    EXPECT_EQ(ev[2].value(0), 2);
    EXPECT_TRUE(ev[3].left);
    EXPECT_EQ(ev[3].value(0), 2);
    EXPECT_EQ(ev[4].value(0), -1);
    EXPECT_EQ(ev[5].time, 1);
}

TEST(Paths, SupNormReportsArgmax)
{
    auto const s = sup_norm(sample_path());
    EXPECT_EQ(s.value, 2);
    EXPECT_EQ(s.argmax, 0.3);
    EXPECT_FALSE(s.at_left_limit);

    // maximum reached only as a left limit
    CadlagPath p({0, 1}, {v1(0), v1(0)}, {{0.5, v1(5), v1(0)}});
    auto const t = sup_norm(p);
    EXPECT_EQ(t.value, 5);
    EXPECT_TRUE(t.at_left_limit);
}

TEST(Paths, ModulusWRespectsOpenAndClosedEnds)
{
    auto const p = sample_path();
    EXPECT_EQ(modulus_w(p, {0, 0.3, false}), 0);  // [0, 0.3) sees 0 and the left limit 0 at 0.3
    EXPECT_EQ(modulus_w(p, {0, 0.3, true}), 2);
    EXPECT_EQ(modulus_w(p, {0.3, 0.5, false}), 0);  // value 2 at 0.3 and left limit 2 at 0.5
    EXPECT_EQ(modulus_w(p, {0.3, 0.5, true}), 3);
    EXPECT_EQ(modulus_w(p, {0, 1, true}), 3);
}

TEST(Paths, ModulusWppIgnoresIsolatedJumps)
{
    auto const p = sample_path();
    // A single jump gives min(0, .) = 0; two jumps within delta give min(2, 3).
    EXPECT_EQ(modulus_wpp(p, 0.1), 0);
    EXPECT_EQ(modulus_wpp(p, 0.2), 2);
    EXPECT_EQ(modulus_wpp(p, 1), 2);
    EXPECT_THROW(modulus_wpp(p, 1.5), DomainError);
}

TEST(Paths, ArithmeticIsEventwise)
{
    auto const p = sample_path();
    auto const z = p - p;
    EXPECT_EQ(sup_norm(z).value, 0);
    auto const d = p + p.scaled(2);
    EXPECT_EQ(sup_norm(d).value, 6);
}

TEST(Paths, ValidationRejectsBadInput)
{
    EXPECT_THROW(CadlagPath({0, 0.5}, {v1(0), v1(0)}), DomainError);
    EXPECT_THROW(CadlagPath({0, 1}, {v1(0)}), DomainError);
    EXPECT_THROW(CadlagPath({0, 1}, {v1(0), v1(0)}, {{0, v1(0), v1(1)}}), DomainError);
    EXPECT_THROW(CadlagPath({0, 1}, {v1(0), v1(0)}, {{0.5, v1(0), v1(1)}, {0.4, v1(1), v1(0)}}), DomainError);
}

TEST(PathFiles, CsvRoundTripIsExact)
{
    RandomStream rng(9, 0);
    std::vector<double> grid{0, 0.25, 0.5, 0.75, 1};
    std::vector<Vector> values;
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        Vector v(2);
        v << rng.uniform() * 1e6 - 5e5, std::ldexp(rng.uniform(), -40);
        values.push_back(v);
    }
    Vector l(2), r(2);
    l << 1.0 / 3, -2;
    r << 0.1, 7e-300;
    CadlagPath const p(grid, values, {{0.6, l, r}});
    std::stringstream ss;
    write_path_csv(ss, p, "0123456789abcdef");
    auto const back = read_path_csv(ss);
    EXPECT_EQ(back.checksum, "0123456789abcdef");
    EXPECT_EQ(back.path.grid(), p.grid());
    for (std::size_t i = 0; i < grid.size(); ++i)
        EXPECT_EQ(back.path.values()[i], p.values()[i]);
    ASSERT_EQ(back.path.jumps().size(), 1u);
    EXPECT_EQ(back.path.jumps()[0].left, l);
    EXPECT_EQ(back.path.jumps()[0].right, r);
}

TEST(PathFiles, BinaryRoundTripIsExact)
{
    auto const p = sample_path();
    std::stringstream ss;
    write_path_binary(ss, p, 0xfeedbeefull);
    auto const back = read_path_binary(ss);
    EXPECT_EQ(back.checksum, 0xfeedbeefull);
    EXPECT_EQ(back.path.grid(), p.grid());
    EXPECT_EQ(sup_norm(back.path - p).value, 0);
}

TEST(PathFiles, MalformedInputThrows)
{
    std::stringstream empty;
    EXPECT_THROW(read_path_csv(empty), FormatError);

    std::stringstream ss;
    write_path_csv(ss, sample_path(), "0123456789abcdef");
    std::string text = ss.str();
    text.erase(text.size() - 3);  // cut the last row short
    std::stringstream cut(text);
    EXPECT_THROW(read_path_csv(cut), FormatError);

    std::stringstream bin;
    write_path_binary(bin, sample_path(), 1);
    std::string b = bin.str();
    b[0] ^= 0x55;
    std::stringstream bad(b);
    EXPECT_THROW(read_path_binary(bad), FormatError);
    std::stringstream shortb(bin.str().substr(0, 20));
    EXPECT_THROW(read_path_binary(shortb), FormatError);
}

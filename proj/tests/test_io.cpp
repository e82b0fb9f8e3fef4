#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ptycho/io.hpp"
#include "test_util.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <unistd.h>

using namespace ptycho;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("ptycho_io_" + std::to_string(::getpid())))
    {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<unsigned char> bytes_of(const fs::path& p)
{
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& b)
{
    std::ofstream os(p, std::ios::binary);
    os.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

std::uint64_t le(const std::vector<unsigned char>& b, std::size_t at, int width)
{
    std::uint64_t v = 0;
    for (int i = width - 1; i >= 0; --i) v = (v << 8) | b[at + static_cast<std::size_t>(i)];
    return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("PTYA byte layout")
{
    TempDir dir;
    const RealField2D f(Shape{2, 3}, std::vector<double>{1.0, -2.5, 0.0, 3.25, 1e-300, -0.0});
    write_field(dir.path / "a.ptya", f);
    const auto b = bytes_of(dir.path / "a.ptya");
    REQUIRE(b.size() == 4 + 3 * 4 + 2 * 8 + 6 * 8);
    CHECK(std::string(b.begin(), b.begin() + 4) == "PTYA");
    CHECK(le(b, 4, 4) == 1);   // version
    CHECK(le(b, 8, 4) == 1);   // float64
    CHECK(le(b, 12, 4) == 2);  // ndim
    CHECK(le(b, 16, 8) == 2);
    CHECK(le(b, 24, 8) == 3);
    double second;
    const std::uint64_t bits = le(b, 32 + 8, 8);
    std::memcpy(&second, &bits, 8);
    CHECK(second == -2.5);

    const ComplexField2D c(Shape{1, 2}, std::vector<cplx>{{1.0, 2.0}, {3.0, 4.0}});
    write_field(dir.path / "c.ptya", c);
    const auto bc = bytes_of(dir.path / "c.ptya");
    CHECK(le(bc, 8, 4) == 2);
    REQUIRE(bc.size() == 32 + 4 * 8);
    double im0;
    const std::uint64_t b_im = le(bc, 32 + 8, 8);
    std::memcpy(&im0, &b_im, 8);
    CHECK(im0 == 2.0);
}

TEST_CASE("bit-exact round trips")
{
    TempDir dir;
    std::mt19937_64 rng(71);
    RealField2D r = testutil::random_real({7, 5}, rng);
    r[0] = std::numeric_limits<double>::denorm_min();
    r[1] = -0.0;
    r[2] = std::numeric_limits<double>::infinity();
    write_field(dir.path / "r.ptya", r);
    const auto r2 = read_real_field(dir.path / "r.ptya");
    REQUIRE(r2.shape() == r.shape());
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(same_bits(r[i], r2[i]));

    const auto c = testutil::random_complex({4, 9}, rng);
    write_field(dir.path / "c.ptya", c);
    const auto c2 = read_complex_field(dir.path / "c.ptya");
    REQUIRE(c2.shape() == c.shape());
    for (std::size_t i = 0; i < c.size(); ++i) {
        CHECK(same_bits(c[i].real(), c2[i].real()));
        CHECK(same_bits(c[i].imag(), c2[i].imag()));
    }

    std::vector<RealField2D> frames{testutil::random_real({3, 3}, rng), testutil::random_real({3, 3}, rng)};
    write_stack(dir.path / "s.ptya", frames);
    const auto back = read_stack(dir.path / "s.ptya");
    REQUIRE(back.size() == 2);
    CHECK(back[1] == frames[1]);
    const auto raw = read_array(dir.path / "s.ptya");
    CHECK(raw.dims == std::vector<std::uint64_t>{2, 3, 3});
    CHECK(raw.element_count() == 18);

    // Rewriting what was read gives the same bytes.
    write_field(dir.path / "c2.ptya", c2);
    CHECK(bytes_of(dir.path / "c.ptya") == bytes_of(dir.path / "c2.ptya"));
}

TEST_CASE("malformed containers")
{
    TempDir dir;
    const RealField2D f(3, 3, 1.5);
    write_field(dir.path / "ok.ptya", f);
    const auto good = bytes_of(dir.path / "ok.ptya");
    const auto p = dir.path / "bad.ptya";

    auto expect_error = [&](std::vector<unsigned char> b, const std::string& fragment) {
        write_bytes(p, b);
        try {
            read_array(p);
            FAIL("expected IoError for " << fragment);
        } catch (const IoError& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
        }
    };
    auto b = good;
    b[0] = 'X';
    expect_error(b, "not a PTYA file");
    b = good;
    b[4] = 2;
    expect_error(b, "unsupported version");
    b = good;
    b[8] = 7;
    expect_error(b, "unknown dtype");
    expect_error(std::vector<unsigned char>(good.begin(), good.end() - 3), "truncated payload");
    expect_error(std::vector<unsigned char>(good.begin(), good.begin() + 10), "truncated header");
    b = good;
    b.push_back(0);
    expect_error(b, "trailing bytes");

    CHECK_THROWS_AS(read_array(dir.path / "missing.ptya"), IoError);
    CHECK_THROWS_AS(read_complex_field(dir.path / "ok.ptya"), IoError);
    CHECK_THROWS_AS(read_stack(dir.path / "ok.ptya"), IoError);
    CHECK_THROWS_AS(write_field(dir.path / "no" / "such" / "dir.ptya", f), IoError);

    ArrayData bad;
    bad.dims = {2, 2};
    bad.values = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(write_array(dir.path / "x.ptya", bad), IoError);
    CHECK_THROWS_AS(write_stack(dir.path / "y.ptya", {}), IoError);
}

TEST_CASE("PGM export")
{
    TempDir dir;
    const RealField2D v(Shape{1, 3}, std::vector<double>{0.0, 0.5, 2.0});
    write_pgm16(dir.path / "v.pgm", v, 0.0, 1.0);
    const auto b = bytes_of(dir.path / "v.pgm");
    const std::string header = "P5\n3 1\n65535\n";
    REQUIRE(b.size() == header.size() + 6);
    CHECK(std::string(b.begin(), b.begin() + static_cast<long>(header.size())) == header);
    const std::size_t h = header.size();
    CHECK((b[h] << 8 | b[h + 1]) == 0);
    CHECK((b[h + 2] << 8 | b[h + 3]) == 32768);  // round(0.5 * 65535)
    CHECK((b[h + 4] << 8 | b[h + 5]) == 65535);  // clamped

    const ComplexField2D f(Shape{2, 2}, std::vector<cplx>{{1.0, 0.0}, {0.0, 3.0}, {-2.0, 0.0}, {0.0, -0.5}});
    export_amplitude(dir.path / "amp.pgm", f);
    CHECK(read_text(dir.path / "amp.pgm.scale.txt") == "min 0.5\nmax 3\n");
    const auto ba = bytes_of(dir.path / "amp.pgm");
    const std::size_t ha = std::string("P5\n2 2\n65535\n").size();
    CHECK((ba[ha + 2] << 8 | ba[ha + 3]) == 65535);
    CHECK((ba[ha + 6] << 8 | ba[ha + 7]) == 0);

    export_phase(dir.path / "ph.pgm", f);
    const auto bp = bytes_of(dir.path / "ph.pgm");
    CHECK((bp[ha] << 8 | bp[ha + 1]) == 32768);      // phase 0
    CHECK((bp[ha + 4] << 8 | bp[ha + 5]) == 65535);  // phase pi
    CHECK((bp[ha + 2] << 8 | bp[ha + 3]) == 49151);  // phase pi/2
}

TEST_CASE("number formatting and CSV")
{
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(2.0) == "2");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);

    TempDir dir;
    std::vector<MetricsRecord> hist(2);
    hist[0] = {0, 0.5, -12.25, 1.0, 3.5};
    hist[1] = {1, 0.25, -13.0, 0.125, 0.0};
    write_history_csv(dir.path / "h.csv", hist);
    CHECK(read_text(dir.path / "h.csv") ==
          "iter,r_factor,lagrangian,rel_change,elapsed_ms\n0,0.5,-12.25,1,3.5\n1,0.25,-13,0.125,0\n");
    write_text(dir.path / "t.txt", "abc\n");
    CHECK(read_text(dir.path / "t.txt") == "abc\n");
    CHECK_THROWS_AS(read_text(dir.path / "none.txt"), IoError);
}

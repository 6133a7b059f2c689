#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "thra/spectrum.hpp"

using namespace thra;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("wavelength grid validation") {
    CHECK_THROWS_AS(WavelengthGrid(std::vector<double>{}), Error);
    CHECK_THROWS_AS(WavelengthGrid({1500.0, 1500.0}), Error);
    CHECK_THROWS_AS(WavelengthGrid({1500.0, 1499.0}), Error);
    CHECK_THROWS_AS(WavelengthGrid({-1.0, 1.0}), Error);
    CHECK_THROWS_AS(WavelengthGrid({0.0}), Error);

    const WavelengthGrid g({1500.0, 1550.0, 1600.0});
    CHECK(g.size() == 3);
    CHECK(g.contains(1500.0));
    CHECK(g.contains(1575.5));
    CHECK(!g.contains(1499.999));
    CHECK(!g.contains(1600.001));
}

TEST_CASE("uniform grid covers the band inclusively") {
    const WavelengthGrid g = WavelengthGrid::uniform(1500.0, 2100.0, 1.0);
    CHECK(g.size() == 601);
    CHECK(g.front() == 1500.0);
    CHECK(g.back() == 2100.0);
    CHECK(g == WavelengthGrid::analysis_default());

    const WavelengthGrid g2 = WavelengthGrid::uniform(1500.0, 1501.5, 1.0);
    CHECK(g2.size() == 2);
    CHECK(g2.back() == 1501.0);

    CHECK_THROWS_AS(WavelengthGrid::uniform(1500.0, 1400.0, 1.0), Error);
    CHECK_THROWS_AS(WavelengthGrid::uniform(1500.0, 1600.0, 0.0), Error);
    CHECK_THROWS_AS(WavelengthGrid::uniform(1500.0, 1600.0, -1.0), Error);
}

TEST_CASE("dB/linear conversions") {
    CHECK(db_to_linear(0.0) == 1.0);
    CHECK(db_to_linear(-10.0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(linear_to_db(1.0) == 0.0);
    CHECK(linear_to_db(0.5) == doctest::Approx(-3.0102999566).epsilon(1e-10));
    CHECK_THROWS_AS(linear_to_db(0.0), Error);
    CHECK_THROWS_AS(linear_to_db(-2.0), Error);

    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> dist(-200.0, 0.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = dist(rng);
        CHECK(linear_to_db(db_to_linear(x)) == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("raw scan reduction recovers known ratios") {
    const WavelengthGrid g({1550.0, 1551.0, 1552.0});
    // i_mes = i_ref/2 at full filter transmission: half the light got through.
    const RawScan half(g, {1.0, 1.0, 1.0}, {0.5, 0.5, 0.5}, {1.0, 1.0, 1.0});
    const auto s = reduce_raw_scan(half);
    for (double v : s.values_db) CHECK(v == doctest::Approx(-3.0102999566).epsilon(1e-10));

    // A 10% filter and equal intensities mean the device made up the
    // difference: apparent gain comes out positive and unclamped.
    const RawScan gain(g, {1.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {0.1, 0.1, 0.1});
    for (double v : reduce_raw_scan(gain).values_db)
        CHECK(v == doctest::Approx(10.0).epsilon(1e-12));

    const RawScan unity(g, {2.0, 2.0, 2.0}, {2.0, 2.0, 2.0}, {1.0, 1.0, 1.0});
    for (double v : reduce_raw_scan(unity).values_db) CHECK(v == 0.0);
}

TEST_CASE("raw scan reduction is the inverse of applying a known attenuation") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> gdist(0.0, 60.0);
    const WavelengthGrid grid({1600.0});
    for (int i = 0; i < 100; ++i) {
        const double g = gdist(rng);
        const RawScan scan(grid, {1.0}, {std::pow(10.0, -g / 10.0)}, {1.0});
        const double got = reduce_raw_scan(scan).values_db[0];
        CHECK(got == doctest::Approx(-g).epsilon(1e-12));
    }
}

TEST_CASE("raw scan rejects bad intensities with the wavelength named") {
    const WavelengthGrid g({1550.0, 1673.0});
    CHECK_THROWS_WITH_AS(RawScan(g, {1.0, -1.0}, {1.0, 1.0}, {1.0, 1.0}),
                         doctest::Contains("1673"), Error);
    CHECK_THROWS_WITH_AS(RawScan(g, {1.0, 1.0}, {0.0, 1.0}, {1.0, 1.0}),
                         doctest::Contains("1550"), Error);
    CHECK_THROWS_AS(RawScan(g, {1.0, 1.0}, {1.0, 1.0}, {1.0, 1.1}), Error);
    CHECK_THROWS_AS(RawScan(g, {1.0, 1.0}, {1.0, 1.0}, {0.0, 1.0}), Error);
}

TEST_CASE("resample interpolates linearly in dB") {
    const TransmittanceSpectrum s(WavelengthGrid({1500.0, 1600.0}), {-10.0, -20.0});
    const auto r = resample(s, WavelengthGrid({1550.0}));
    CHECK(r.values_db[0] == doctest::Approx(-15.0).epsilon(1e-14));

    const auto quarter = resample(s, WavelengthGrid({1525.0}));
    CHECK(quarter.values_db[0] == doctest::Approx(-12.5).epsilon(1e-14));
}

TEST_CASE("resample onto the same grid is bitwise identity") {
    const WavelengthGrid g = WavelengthGrid::uniform(1500.0, 1600.0, 0.5);
    std::vector<double> v(g.size());
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-80.0, 0.0);
    for (auto& x : v) x = dist(rng);
    const TransmittanceSpectrum s(g, v);
    const auto r = resample(s, g);
    CHECK(r.values_db == v);
}

TEST_CASE("resample out-of-span policies") {
    const TransmittanceSpectrum s(WavelengthGrid({1500.0, 1600.0}), {-10.0, -20.0});
    const WavelengthGrid target({1400.0, 1550.0, 1700.0});

    CHECK_THROWS_WITH_AS(resample(s, target), doctest::Contains("outside source span"), Error);

    const auto clamped = resample(s, target, ResamplePolicy::clamp_to_edge());
    CHECK(clamped.values_db[0] == -10.0);
    CHECK(clamped.values_db[1] == -15.0);
    CHECK(clamped.values_db[2] == -20.0);

    const auto filled = resample(s, target, ResamplePolicy::fill(-0.0));
    CHECK(filled.values_db[0] == 0.0);
    CHECK(filled.values_db[2] == 0.0);

    const auto deep = resample(s, target, ResamplePolicy::fill(-120.0));
    CHECK(deep.values_db[0] == -120.0);
    CHECK(deep.values_db[1] == -15.0);
}

TEST_CASE("resampling twice onto the same target equals resampling once") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dist(-60.0, 0.0);
    std::vector<double> v(51);
    for (auto& x : v) x = dist(rng);
    const TransmittanceSpectrum s(WavelengthGrid::uniform(1500.0, 2000.0, 10.0), v);
    const WavelengthGrid target = WavelengthGrid::uniform(1510.0, 1990.0, 7.0);
    const auto once = resample(s, target);
    const auto twice = resample(once, target);
    CHECK(once.values_db == twice.values_db);
}

TEST_CASE("resample carries uncertainties along") {
    const TransmittanceSpectrum s(WavelengthGrid({1500.0, 1600.0}), {-10.0, -20.0},
                                  std::vector<double>{0.2, 0.4});
    const auto r = resample(s, WavelengthGrid({1550.0}));
    REQUIRE(r.uncertainty_db.has_value());
    CHECK((*r.uncertainty_db)[0] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("add_db sums pointwise and combines uncertainty in quadrature") {
    const WavelengthGrid g({1500.0, 1600.0});
    const TransmittanceSpectrum a(g, {-10.0, -20.0}, std::vector<double>{3.0, 0.5});
    const TransmittanceSpectrum b(g, {-5.0, -1.0}, std::vector<double>{4.0, 0.5});
    const auto sum = add_db(a, b);
    CHECK(sum.values_db[0] == -15.0);
    CHECK(sum.values_db[1] == -21.0);
    REQUIRE(sum.uncertainty_db.has_value());
    CHECK((*sum.uncertainty_db)[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK((*sum.uncertainty_db)[1] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

    const TransmittanceSpectrum c(g, {-2.0, -2.0});  // no uncertainty
    CHECK(!add_db(a, c).uncertainty_db.has_value());

    const TransmittanceSpectrum other(WavelengthGrid({1500.0, 1601.0}), {-1.0, -1.0});
    CHECK_THROWS_AS(add_db(a, other), Error);
}

TEST_CASE("add_db is commutative bit for bit") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-90.0, 0.0);
    const WavelengthGrid g = WavelengthGrid::uniform(1500.0, 1700.0, 1.0);
    std::vector<double> va(g.size()), vb(g.size());
    for (auto& x : va) x = dist(rng);
    for (auto& x : vb) x = dist(rng);
    const TransmittanceSpectrum a(g, va), b(g, vb);
    CHECK(add_db(a, b).values_db == add_db(b, a).values_db);
}

TEST_CASE("spectrum CSV round trip") {
    const WavelengthGrid g({1500.0, 1550.5, 1600.0});
    const TransmittanceSpectrum s(g, {-3.25, -40.0, -71.5}, std::vector<double>{0.1, 0.25, 2.0});
    const auto path = std::filesystem::temp_directory_path() / "thra_spectrum_roundtrip.csv";
    save_spectrum_csv(path.string(), s);
    const auto loaded = load_spectrum_csv(path.string());
    CHECK(loaded.grid == g);
    CHECK(loaded.values_db == s.values_db);
    REQUIRE(loaded.uncertainty_db.has_value());
    CHECK(*loaded.uncertainty_db == *s.uncertainty_db);
}

TEST_CASE("spectrum CSV accepts comments and rejects malformed input") {
    const auto ok = write_temp("thra_ok.csv",
                               "# measured 2026-05-12\n"
                               "wavelength_nm,transmittance_db\n"
                               "1500,-10\n"
                               "# mid-file note\n"
                               "1600,-20\n");
    const auto s = load_spectrum_csv(ok);
    CHECK(s.size() == 2);
    CHECK(s.values_db[1] == -20.0);
    CHECK(!s.uncertainty_db.has_value());

    const auto bad_header = write_temp("thra_badheader.csv", "lambda,t\n1500,-10\n");
    CHECK_THROWS_WITH_AS(load_spectrum_csv(bad_header), doctest::Contains("header"), Error);

    const auto bad_order = write_temp("thra_badorder.csv",
                                      "wavelength_nm,transmittance_db\n1600,-10\n1500,-20\n");
    CHECK_THROWS_WITH_AS(load_spectrum_csv(bad_order), doctest::Contains("increasing"), Error);

    const auto bad_field = write_temp("thra_badfield.csv",
                                      "wavelength_nm,transmittance_db\n1500,oops\n");
    CHECK_THROWS_AS(load_spectrum_csv(bad_field), Error);

    const auto short_row = write_temp("thra_shortrow.csv",
                                      "wavelength_nm,transmittance_db,uncertainty_db\n1500,-10\n");
    CHECK_THROWS_AS(load_spectrum_csv(short_row), Error);

    CHECK_THROWS_WITH_AS(load_spectrum_csv("/nonexistent/thra.csv"), doctest::Contains("cannot open"),
                         Error);
}

TEST_CASE("positive dB values need the gain flag") {
    const auto gain = write_temp("thra_gain.csv", "wavelength_nm,transmittance_db\n1500,2.5\n");
    CHECK_THROWS_WITH_AS(load_spectrum_csv(gain), doctest::Contains("positive transmittance"), Error);
    const auto s = load_spectrum_csv(gain, true);
    CHECK(s.values_db[0] == 2.5);
}

TEST_CASE("raw scan CSV loads and validates") {
    const auto ok = write_temp("thra_raw.csv",
                               "wavelength_nm,i_ref,i_mes,t_f\n"
                               "1500,1.0,0.5,1.0\n"
                               "1600,1.0,1.0,0.1\n");
    const RawScan raw = load_raw_scan_csv(ok);
    const auto s = reduce_raw_scan(raw);
    CHECK(s.values_db[0] == doctest::Approx(-3.0103).epsilon(1e-4));
    CHECK(s.values_db[1] == doctest::Approx(10.0).epsilon(1e-12));

    const auto bad = write_temp("thra_rawbad.csv",
                                "wavelength_nm,i_ref,i_mes,t_f\n1500,1.0,0.5,1.5\n");
    CHECK_THROWS_WITH_AS(load_raw_scan_csv(bad), doctest::Contains("t_f"), Error);
}

TEST_CASE("flat spectrum helper") {
    const auto s = TransmittanceSpectrum::flat(WavelengthGrid::uniform(1500, 1510, 1), -40.0);
    CHECK(s.size() == 11);
    for (double v : s.values_db) CHECK(v == -40.0);
}

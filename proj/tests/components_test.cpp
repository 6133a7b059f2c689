#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "thra/components.hpp"

using namespace thra;

namespace {

const WavelengthGrid kGrid = WavelengthGrid::analysis_default();

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "thra_components_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
    const auto path = temp_dir() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

double value_at(const TransmittanceSpectrum& s, double lambda_nm) {
    return resample(s, WavelengthGrid({lambda_nm})).values_db[0];
}

}  // namespace

TEST_CASE("leg parsing and mirroring") {
    CHECK(Leg::parse("forward") == Leg::forward());
    CHECK(Leg::parse("backward") == Leg::backward());
    CHECK(Leg::parse("23") == Leg::port_pair(2, 3));
    CHECK_THROWS_AS(Leg::parse("sideways"), Error);
    CHECK_THROWS_AS(Leg::parse("2"), Error);
    CHECK_THROWS_AS(Leg::parse("234"), Error);
    CHECK_THROWS_AS(Leg::port_pair(1, 1), Error);
    CHECK_THROWS_AS(Leg::port_pair(0, 1), Error);

    CHECK(Leg::forward().mirrored() == Leg::backward());
    CHECK(Leg::backward().mirrored() == Leg::forward());
    CHECK(Leg::port_pair(1, 2).mirrored() == Leg::port_pair(2, 1));
    CHECK(Leg::port_pair(3, 1).str() == "31");
}

TEST_CASE("attenuator model is flat and validated") {
    const Component att = synth_attenuator("att30", 30.0, kGrid);
    CHECK(att.kind == ComponentKind::kTwoPort);
    CHECK(att.provenance == Provenance::kSynthetic);
    CHECK(att.model == "attenuator");
    for (double v : att.leg(Leg::forward()).values_db) CHECK(v == -30.0);
    CHECK(att.leg(Leg::forward()) == att.leg(Leg::backward()));

    const Component zero = synth_attenuator("att0", 0.0, kGrid);
    for (double v : zero.leg(Leg::forward()).values_db) CHECK(v == 0.0);

    CHECK_THROWS_AS(synth_attenuator("bad", -3.0, kGrid), Error);

    // Two 15 dB attenuators cascade to one 30 dB attenuator.
    const Component att15 = synth_attenuator("att15", 15.0, kGrid);
    const auto sum = add_db(att15.leg(Leg::forward()), att15.leg(Leg::forward()));
    CHECK(sum.values_db == att.leg(Leg::forward()).values_db);
}

TEST_CASE("isolator model: flat forward, isolation decaying away from center") {
    const Component iso = synth_isolator("iso", IsolatorParams{}, kGrid);
    const auto& fwd = iso.leg(Leg::forward());
    const auto& bwd = iso.leg(Leg::backward());
    for (double v : fwd.values_db) CHECK(v == -1.0);
    CHECK(value_at(bwd, 1550.0) == doctest::Approx(-50.0).epsilon(1e-12));
    CHECK(value_at(bwd, 2050.0) == doctest::Approx(-25.0).epsilon(1e-12));
    CHECK(value_at(bwd, 1500.0) == doctest::Approx(-47.5).epsilon(1e-12));

    // Backward never beats forward, even where the linear decay would.
    for (std::size_t i = 0; i < kGrid.size(); ++i) CHECK(bwd.values_db[i] <= fwd.values_db[i]);

    IsolatorParams flat;
    flat.rate_db_per_nm = 0.0;
    const Component iso_flat = synth_isolator("iso_flat", flat, kGrid);
    for (double v : iso_flat.leg(Leg::backward()).values_db) CHECK(v == -50.0);

    IsolatorParams bad;
    bad.rate_db_per_nm = -0.1;
    CHECK_THROWS_AS(synth_isolator("bad", bad, kGrid), Error);
    bad = IsolatorParams{};
    bad.isolation_db = -1.0;
    CHECK_THROWS_AS(synth_isolator("bad", bad, kGrid), Error);
}

TEST_CASE("wdm model: passbands, leak windows, stop floor") {
    WdmParams p;
    p.passbands = {{1540.0, 1560.0, 0.5}};
    p.stop_floor_db = 40.0;
    p.leak_windows = {{1810.0, 2100.0, 10.0}};
    const Component wdm = synth_wdm("wdm", p, kGrid);
    const auto& s = wdm.leg(Leg::forward());
    CHECK(value_at(s, 1550.0) == -0.5);
    CHECK(value_at(s, 1540.0) == -0.5);  // closed interval
    CHECK(value_at(s, 1560.0) == -0.5);
    CHECK(value_at(s, 1539.0) == -40.0);
    CHECK(value_at(s, 1700.0) == -40.0);
    CHECK(value_at(s, 1810.0) == -10.0);
    CHECK(value_at(s, 2000.0) == -10.0);
    CHECK(value_at(s, 1500.0) == -40.0);
    CHECK(wdm.leg(Leg::forward()) == wdm.leg(Leg::backward()));
}

TEST_CASE("wdm windows are order-insensitive and overlaps take the transparent value") {
    WdmParams a;
    a.passbands = {{1540.0, 1560.0, 0.5}, {1555.0, 1580.0, 2.0}};
    a.stop_floor_db = 40.0;
    WdmParams b = a;
    std::swap(b.passbands[0], b.passbands[1]);
    const auto ca = synth_wdm("w", a, kGrid);
    const auto cb = synth_wdm("w", b, kGrid);
    CHECK(ca.leg(Leg::forward()).values_db == cb.leg(Leg::forward()).values_db);
    // In the overlap both passbands apply; the lower loss wins.
    CHECK(value_at(ca.leg(Leg::forward()), 1557.0) == -0.5);
    CHECK(value_at(ca.leg(Leg::forward()), 1570.0) == -2.0);
}

TEST_CASE("wdm rejects inconsistent window sets") {
    WdmParams overlap;
    overlap.passbands = {{1540.0, 1560.0, 0.5}};
    overlap.leak_windows = {{1555.0, 1600.0, 10.0}};
    CHECK_THROWS_WITH_AS(synth_wdm("w", overlap, kGrid), doctest::Contains("overlaps"), Error);

    WdmParams outside;
    outside.passbands = {{1400.0, 1450.0, 0.5}};
    CHECK_THROWS_WITH_AS(synth_wdm("w", outside, kGrid), doctest::Contains("outside the grid span"), Error);

    WdmParams inverted;
    inverted.passbands = {{1560.0, 1540.0, 0.5}};
    CHECK_THROWS_AS(synth_wdm("w", inverted, kGrid), Error);

    WdmParams deep_pass;
    deep_pass.passbands = {{1540.0, 1560.0, 45.0}};
    deep_pass.stop_floor_db = 40.0;
    CHECK_THROWS_WITH_AS(synth_wdm("w", deep_pass, kGrid), doctest::Contains("stop floor"), Error);

    WdmParams deep_leak;
    deep_leak.leak_windows = {{1800.0, 1900.0, 60.0}};
    deep_leak.stop_floor_db = 40.0;
    CHECK_THROWS_AS(synth_wdm("w", deep_leak, kGrid), Error);
}

TEST_CASE("bend loss calibration for 12 mm windings") {
    const BendLossParams p = BendLossParams::radius_12mm(1.0);
    CHECK(bend_loss_db(1550.0, p) <= 1.0);
    CHECK(bend_loss_db(1830.0, p) >= 30.0);
    for (double lam = 1830.0; lam <= 2100.0; lam += 10.0) CHECK(bend_loss_db(lam, p) >= 30.0);

    // Loss grows with wavelength and saturates at the cap.
    double prev = bend_loss_db(1500.0, p);
    for (double lam = 1510.0; lam <= 2100.0; lam += 10.0) {
        const double cur = bend_loss_db(lam, p);
        CHECK(cur >= prev);
        prev = cur;
    }
    CHECK(bend_loss_db(2100.0, p) == doctest::Approx(60.0).epsilon(1e-12));

    // Linear in length.
    const BendLossParams p3 = BendLossParams::radius_12mm(3.0);
    CHECK(bend_loss_db(1700.0, p3) == doctest::Approx(3.0 * bend_loss_db(1700.0, p)).epsilon(1e-12));

    const BendLossParams zero = BendLossParams::radius_12mm(0.0);
    CHECK(bend_loss_db(1830.0, zero) == 0.0);

    BendLossParams bad = p;
    bad.radius_mm = -1.0;
    CHECK_THROWS_AS(bend_loss_db(1550.0, bad), Error);
    bad = p;
    bad.cap_db_per_m = 0.01;  // below the floor
    CHECK_THROWS_AS(bend_loss_db(1550.0, bad), Error);
}

TEST_CASE("bend filter component samples the loss curve") {
    const BendLossParams p = BendLossParams::radius_12mm(1.0);
    const Component bend = synth_bend_filter("bend", p, kGrid);
    const auto& s = bend.leg(Leg::forward());
    for (std::size_t i = 0; i < kGrid.size(); i += 37)
        CHECK(s.values_db[i] == doctest::Approx(-bend_loss_db(kGrid[i], p)).epsilon(1e-12));
    CHECK(bend.leg(Leg::forward()) == bend.leg(Leg::backward()));
}

TEST_CASE("synthetic models only emit loss") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> loss(0.0, 5.0);
    std::uniform_real_distribution<double> isol(0.0, 60.0);
    std::uniform_real_distribution<double> rate(0.0, 0.2);
    for (int i = 0; i < 50; ++i) {
        IsolatorParams p;
        p.forward_loss_db = loss(rng);
        p.isolation_db = isol(rng);
        p.rate_db_per_nm = rate(rng);
        const Component c = synth_isolator("iso", p, kGrid);
        for (double v : c.leg(Leg::forward()).values_db) CHECK(v <= 0.0);
        for (double v : c.leg(Leg::backward()).values_db) CHECK(v <= 0.0);
    }
}

TEST_CASE("two-port components align their legs on a common grid") {
    const TransmittanceSpectrum fwd(WavelengthGrid::uniform(1500, 1600, 1),
                                    std::vector<double>(101, -3.0));
    const TransmittanceSpectrum bwd(WavelengthGrid::uniform(1500, 1600, 2),
                                    std::vector<double>(51, -4.0));
    const Component c = make_two_port("pm", fwd, bwd);
    CHECK(c.leg(Leg::backward()).grid == c.leg(Leg::forward()).grid);
    CHECK(c.leg(Leg::backward()).values_db[1] == -4.0);

    // A backward leg that cannot cover the forward grid is rejected.
    const TransmittanceSpectrum narrow(WavelengthGrid::uniform(1520, 1580, 1),
                                       std::vector<double>(61, -4.0));
    CHECK_THROWS_WITH_AS(make_two_port("pm", fwd, narrow), doctest::Contains("backward"), Error);
}

TEST_CASE("multi-port components expose only their measured pairs") {
    std::map<std::string, TransmittanceSpectrum> pairs;
    pairs.emplace("12", TransmittanceSpectrum::flat(kGrid, -5.0));
    pairs.emplace("23", TransmittanceSpectrum::flat(kGrid, -6.0));
    const Component pbs = make_multi_port("pbs", pairs);
    CHECK(pbs.kind == ComponentKind::kMultiPort);
    CHECK(pbs.has_leg(Leg::port_pair(1, 2)));
    CHECK(!pbs.has_leg(Leg::port_pair(2, 1)));
    CHECK(pbs.leg(Leg::port_pair(2, 3)).values_db[0] == -6.0);
    CHECK_THROWS_WITH_AS(pbs.leg(Leg::port_pair(3, 2)), doctest::Contains("32"), Error);
    CHECK_THROWS_WITH_AS(pbs.leg(Leg::forward()), doctest::Contains("port pair"), Error);
    CHECK_THROWS_AS(make_multi_port("pbs", {}), Error);
}

TEST_CASE("catalog rejects duplicate ids") {
    Catalog catalog;
    catalog.add(synth_attenuator("att", 1.0, kGrid));
    CHECK(catalog.contains("att"));
    CHECK_THROWS_WITH_AS(catalog.add(synth_attenuator("att", 2.0, kGrid)),
                         doctest::Contains("duplicate"), Error);
    CHECK_THROWS_WITH_AS(catalog.at("ghost"), doctest::Contains("ghost"), Error);
}

TEST_CASE("component manifests load measured two-port data") {
    const std::string csv =
        "wavelength_nm,transmittance_db\n1500,-3\n1800,-4\n2100,-5\n";
    write_file("pm_f.csv", csv);
    write_file("pm_b.csv", "wavelength_nm,transmittance_db\n1500,-3.1\n1800,-4.1\n2100,-5.1\n");
    const auto manifest = write_file("pm.json",
                                     "{\"id\": \"pm\", \"kind\": \"two_port\","
                                     " \"legs\": {\"forward\": \"pm_f.csv\", \"backward\": \"pm_b.csv\"}}");
    const Component pm = load_component_manifest(manifest, kGrid);
    CHECK(pm.id == "pm");
    CHECK(pm.provenance == Provenance::kMeasured);
    CHECK(value_at(pm.leg(Leg::forward()), 1650.0) == doctest::Approx(-3.5).epsilon(1e-12));
}

TEST_CASE("manifest with a missing direction names the absent leg") {
    write_file("only_f.csv", "wavelength_nm,transmittance_db\n1500,-3\n2100,-5\n");
    const auto manifest = write_file("onlyf.json",
                                     "{\"id\": \"pm\", \"legs\": {\"forward\": \"only_f.csv\"}}");
    CHECK_THROWS_WITH_AS(load_component_manifest(manifest, kGrid),
                         doctest::Contains("backward spectrum missing"), Error);
}

TEST_CASE("manifest must choose between measured legs and a model") {
    const auto both = write_file("both.json",
                                 "{\"id\": \"x\", \"legs\": {\"forward\": -1, \"backward\": -1},"
                                 " \"model\": {\"name\": \"attenuator\", \"params\": {\"loss_db\": 1}}}");
    CHECK_THROWS_WITH_AS(load_component_manifest(both, kGrid), doctest::Contains("exactly one"), Error);

    const auto neither = write_file("neither.json", "{\"id\": \"x\"}");
    CHECK_THROWS_AS(load_component_manifest(neither, kGrid), Error);
}

TEST_CASE("model manifests synthesize on the analysis grid") {
    const auto manifest = write_file("iso.json",
                                     "{\"id\": \"iso\", \"model\": {\"name\": \"isolator\","
                                     " \"params\": {\"isolation_db\": 40}}}");
    const Component iso = load_component_manifest(manifest, kGrid);
    CHECK(iso.provenance == Provenance::kSynthetic);
    CHECK(iso.model == "isolator");
    CHECK(value_at(iso.leg(Leg::backward()), 1550.0) == -40.0);

    const auto unknown = write_file("mystery.json",
                                    "{\"id\": \"m\", \"model\": {\"name\": \"prism\"}}");
    CHECK_THROWS_WITH_AS(load_component_manifest(unknown, kGrid), doctest::Contains("unknown model"),
                         Error);

    const auto bad_bend = write_file("bend9.json",
                                     "{\"id\": \"b\", \"model\": {\"name\": \"bend_filter\","
                                     " \"params\": {\"radius_mm\": 9}}}");
    CHECK_THROWS_WITH_AS(load_component_manifest(bad_bend, kGrid),
                         doctest::Contains("no shipped calibration"), Error);
}

TEST_CASE("manifest kind declarations are checked against the data") {
    write_file("k_f.csv", "wavelength_nm,transmittance_db\n1500,-3\n2100,-5\n");
    write_file("k_b.csv", "wavelength_nm,transmittance_db\n1500,-3\n2100,-5\n");
    const auto wrong = write_file("wrongkind.json",
                                  "{\"id\": \"x\", \"kind\": \"multi_port\","
                                  " \"legs\": {\"forward\": \"k_f.csv\", \"backward\": \"k_b.csv\"}}");
    CHECK_THROWS_WITH_AS(load_component_manifest(wrong, kGrid), doctest::Contains("does not match"),
                         Error);
}

TEST_CASE("multi-port manifests load pair files") {
    write_file("p12.csv", "wavelength_nm,transmittance_db\n1500,-5\n2100,-6\n");
    write_file("p23.csv", "wavelength_nm,transmittance_db\n1500,-5.5\n2100,-30\n");
    const auto manifest = write_file("pbs.json",
                                     "{\"id\": \"pbs\", \"kind\": \"multi_port\","
                                     " \"legs\": {\"pairs\": {\"12\": \"p12.csv\", \"23\": \"p23.csv\"}}}");
    const Component pbs = load_component_manifest(manifest, kGrid);
    CHECK(pbs.has_leg(Leg::port_pair(2, 3)));
    CHECK(!pbs.has_leg(Leg::port_pair(1, 3)));
    CHECK(value_at(pbs.leg(Leg::port_pair(1, 2)), 1500.0) == -5.0);
}

TEST_CASE("component sets load by reference and inline") {
    write_file("s_f.csv", "wavelength_nm,transmittance_db\n1500,-3\n2100,-5\n");
    write_file("s_b.csv", "wavelength_nm,transmittance_db\n1500,-3\n2100,-5\n");
    write_file("setpm.json",
               "{\"id\": \"pm\", \"legs\": {\"forward\": \"s_f.csv\", \"backward\": \"s_b.csv\"}}");
    const auto set = write_file("set.json",
                                "{\"components\": [\"setpm.json\","
                                " {\"id\": \"att\", \"model\": {\"name\": \"attenuator\","
                                "  \"params\": {\"loss_db\": 2}}}]}");
    const Catalog catalog = load_component_set(set, kGrid);
    CHECK(catalog.size() == 2);
    CHECK(catalog.contains("pm"));
    CHECK(catalog.at("att").leg(Leg::forward()).values_db[0] == -2.0);

    const auto empty = write_file("empty_set.json", "{\"components\": []}");
    CHECK_THROWS_AS(load_component_set(empty, kGrid), Error);
}

TEST_CASE("gain-allowed flag lets amplifying data through manifests") {
    write_file("g_f.csv", "wavelength_nm,transmittance_db\n1500,1.5\n2100,-5\n");
    write_file("g_b.csv", "wavelength_nm,transmittance_db\n1500,-3\n2100,-5\n");
    const auto strict = write_file("gain_strict.json",
                                   "{\"id\": \"amp\", \"legs\": {\"forward\": \"g_f.csv\","
                                   " \"backward\": \"g_b.csv\"}}");
    CHECK_THROWS_AS(load_component_manifest(strict, kGrid), Error);
    const auto relaxed = write_file("gain_ok.json",
                                    "{\"id\": \"amp\", \"gain_allowed\": true,"
                                    " \"legs\": {\"forward\": \"g_f.csv\", \"backward\": \"g_b.csv\"}}");
    const Component amp = load_component_manifest(relaxed, kGrid);
    CHECK(amp.leg(Leg::forward()).values_db[0] == 1.5);
}

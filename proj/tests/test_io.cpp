#include "catch_amalgamated.hpp"

#include "fixtures.hpp"
#include "qgraph/compare.hpp"
#include "qgraph/io.hpp"

#include <clocale>
#include <cmath>
#include <filesystem>
#include <numbers>

using namespace qgraph;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    auto d = fs::temp_directory_path() / ("qgraph_io_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("chain shorthand document", "[io][graph]") {
    const auto g = io::parse_graph_document(R"({"chain": {"polygon_sizes":[3,4,3],
        "polygon_edge_lengths_m":[0.25,0.25,0.25], "connector_length_m":0.25}})");
    CHECK(g.vertex_count() == 10);
    CHECK(g.edge_count() == 12);
    CHECK(g.leads().size() == 2);
    CHECK(total_length(g) == Approx(3.0));
}

TEST_CASE("explicit document", "[io][graph]") {
    const auto g = io::parse_graph_document(R"({"vertices":["u","v"],
        "edges":[{"id":"e","u":"u","v":"v","length_m":1.0}],
        "leads":[{"id":"L1","vertex":"u"},{"id":"L2","vertex":"v"}]})");
    CHECK(g.vertex_count() == 2);
    CHECK(g.edges()[0].length == 1.0);
}

TEST_CASE("document errors name the offending field", "[io][graph][errors]") {
    CHECK_THROWS_WITH(io::parse_graph_document(R"({"vertices":["u","v"],
        "edges":[{"id":"e","u":"u","v":"v","length_m":-1.0}]})"),
                      ContainsSubstring("$.edges[0].length_m"));
    CHECK_THROWS_WITH(io::parse_graph_document(R"({"vertices":["u"],
        "edges":[{"id":"e","u":"u","v":"w","length_m":1.0}]})"),
                      ContainsSubstring("$.edges[0].v"));
    CHECK_THROWS_WITH(io::parse_graph_document(R"({"vertices":["u","v"], "edges":[{"id":"e","u":"u","v":"v"}]})"),
                      ContainsSubstring("length_m: missing field"));
    CHECK_THROWS_WITH(io::parse_graph_document(R"({"chain":{"polygon_sizes":[3],"polygon_edge_lengths_m":[0.1],
        "connector_length_m":0}, "vertices":[]})"),
                      ContainsSubstring("cannot be combined"));
    CHECK_THROWS_WITH(io::parse_graph_document(R"({"chain":{"polygon_sizes":[2],"polygon_edge_lengths_m":[0.1],
        "connector_length_m":0}})"),
                      ContainsSubstring("$.chain.polygon_sizes[0]"));
    CHECK_THROWS_WITH(io::parse_graph_document("{\n  \"vertices\": [\"u\",\n  ]\n}"), ContainsSubstring("line 3"));
    CHECK_THROWS_AS(io::parse_graph_document("[1,2]"), io::ParseError);
    CHECK_THROWS_WITH(io::parse_graph_document(R"({"vertices":["u","v","w"],
        "edges":[{"id":"e","u":"u","v":"v","length_m":1.0}]})"),
                      ContainsSubstring("connected"));
}

TEST_CASE("graph documents round trip", "[io][graph]") {
    const auto g = fixtures::c3c4c3prime();
    const auto back = io::parse_graph_document(io::graph_to_json(g).dump());
    REQUIRE(back.edge_count() == g.edge_count());
    CHECK(back.vertices() == g.vertices());
    for (std::size_t i = 0; i < g.edge_count(); ++i) {
        CHECK(back.edges()[i].id == g.edges()[i].id);
        CHECK(back.edges()[i].length == g.edges()[i].length);
    }
}

TEST_CASE("shipped graph files load", "[io][graph]") {
    const fs::path dir = QGRAPH_DATA_DIR;
    CHECK(io::parse_graph_file(dir / "c3c4c3.json").edge_count() == 12);
    CHECK(io::parse_graph_file(dir / "c4c3c4.json").edge_count() == 13);
    CHECK(total_length(io::parse_graph_file(dir / "c3c4c3_prime.json")) == Approx(1.3478).margin(5e-5));
    CHECK_THROWS_AS(io::parse_graph_file(dir / "missing.json"), std::runtime_error);
}

TEST_CASE("Touchstone real-imaginary rows", "[io][touchstone]") {
    const auto m = io::read_touchstone("! comment\n# GHZ S RI R 50\n1.0 0 0 0.5 0 0.5 0 0 0\n");
    REQUIRE(m.size() == 1);
    CHECK(m.frequency_hz[0] == 1e9);
    CHECK(m.s21[0] == cplx{0.5, 0.0});
    CHECK(m.s12[0] == cplx{0.5, 0.0});
    CHECK(m.reference_impedance == 50.0);
}

TEST_CASE("Touchstone magnitude-angle and dB rows", "[io][touchstone]") {
    const auto ma = io::read_touchstone("# MHZ S MA R 75\n100 1 0 0.5 90 0.5 90 1 180 ! tail\n");
    CHECK(ma.frequency_hz[0] == 1e8);
    CHECK(std::abs(ma.s21[0].real()) < 1e-16);
    CHECK(ma.s21[0].imag() == Approx(0.5));
    CHECK(ma.s22[0].real() == Approx(-1.0));
    CHECK(ma.reference_impedance == 75.0);
    const auto db = io::read_touchstone("# khz s db r 50\n5 -6.020599913279624 0 0 0 -20 -90 0 0\n");
    CHECK(db.frequency_hz[0] == 5e3);
    CHECK(db.s11[0].real() == Approx(0.5).epsilon(1e-12));
    CHECK(db.s12[0].imag() == Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("Touchstone rows may wrap", "[io][touchstone]") {
    const auto m = io::read_touchstone("# HZ S RI R 50\n1 0 0 1 0\n 1 0 0 0\n2 0 0 0.5 0 0.5 0 0 0\n");
    REQUIRE(m.size() == 2);
    CHECK(m.s21[0] == cplx{1.0, 0.0});
}

TEST_CASE("Touchstone errors", "[io][touchstone][errors]") {
    CHECK_THROWS_WITH(io::read_touchstone("# GHZ S XX R 50\n"), ContainsSubstring("malformed option line"));
    CHECK_THROWS_WITH(io::read_touchstone("# GHZ Z RI R 50\n"), ContainsSubstring("only S parameters"));
    CHECK_THROWS_WITH(io::read_touchstone("# GHZ S RI R\n"), ContainsSubstring("impedance"));
    CHECK_THROWS_WITH(io::read_touchstone("# GHZ S RI R 50\n2 0 0 0 0 0 0 0 0\n1 0 0 0 0 0 0 0 0\n"),
                      ContainsSubstring("increasing"));
    CHECK_THROWS_AS(io::read_touchstone("# GHZ S RI R 50\n1 0 0 0\n"), io::ParseError);
    CHECK_THROWS_WITH(io::read_touchstone("# GHZ S RI R 50\n1 0 0 0 x 0 0 0 0\n"), ContainsSubstring("line 2"));
}

TEST_CASE("Touchstone round trip", "[io][touchstone]") {
    const auto scan = transmission_scan(fixtures::c3c4c3(0.25, 0.25), 1.0, 30.0, 300, 0.009);
    const auto m = io::from_scan(scan);
    for (auto f : {io::TouchstoneFormat::RI, io::TouchstoneFormat::MA, io::TouchstoneFormat::DB}) {
        const auto back = io::read_touchstone(io::write_touchstone(m, f));
        REQUIRE(back.size() == m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            CHECK(back.frequency_hz[i] == m.frequency_hz[i]);
            CHECK(std::abs(back.s21[i] - m.s21[i]) < 1e-12);
            CHECK(std::abs(back.s11[i] - m.s11[i]) < 1e-12);
        }
    }
}

TEST_CASE("number formatting ignores the C locale", "[io][csv]") {
    const char* old = std::setlocale(LC_NUMERIC, nullptr);
    const std::string saved = old ? old : "C";
    for (const char* name : {"de_DE.UTF-8", "de_DE.utf8", "fr_FR.UTF-8"})
        if (std::setlocale(LC_NUMERIC, name)) break;
    CHECK(io::fmt(0.5) == "0.5");
    CHECK(io::parse_double("2.5") == 2.5);
    CHECK(io::parse_double("+1e3") == 1000.0);
    CHECK_THROWS_AS(io::parse_double("2,5"), io::ParseError);
    std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("spectrum CSV layout", "[io][csv]") {
    const auto scan = transmission_scan(fixtures::single_polygon(3, 0.25), std::numbers::pi / 2 / 0.25, 8.0, 3);
    const auto csv = io::spectrum_csv(scan, 0.25);
    const auto header = csv.substr(0, csv.find('\n'));
    CHECK(header == "k_rad_per_m,kl_over_pi,nu_hz,s11_re,s11_im,s12_re,s12_im,s21_re,s21_im,s22_re,s22_im,T");
    const auto row = csv.substr(header.size() + 1, csv.find('\n', header.size() + 1) - header.size() - 1);
    CHECK(std::count(row.begin(), row.end(), ',') == 11);
    CHECK_THAT(row, ContainsSubstring(",0.5,"));
    const auto j = io::spectrum_json(scan, 0.25);
    CHECK(j["rows"].size() == 3);
    CHECK(j["rows"][0][11].get<double>() == Approx(1 / std::sqrt(2.0)));
}

TEST_CASE("atomic writes leave no temporary files", "[io]") {
    const auto dir = scratch_dir();
    const auto path = dir / "out.csv";
    io::atomic_write(path, "a,b\n1,2\n");
    io::atomic_write(path, "x\n");
    CHECK(io::read_file(path) == "x\n");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    CHECK_THROWS(io::atomic_write(dir / "no" / "such" / "dir.csv", "x"));
    fs::remove_all(dir);
}

TEST_CASE("SVG charts are standalone documents", "[io][svg]") {
    io::Series s{"T & R", {0, 1, 2}, {0, 1, 0.5}};
    const auto svg = io::svg_line_chart({s}, "Title <1>", "x", "y");
    CHECK(svg.rfind("<svg xmlns=\"http://www.w3.org/2000/svg\"", 0) == 0);
    CHECK_THAT(svg, ContainsSubstring("<polyline"));
    CHECK_THAT(svg, ContainsSubstring("T &amp; R"));
    CHECK_THAT(svg, ContainsSubstring("Title &lt;1&gt;"));
    CHECK_THAT(svg, ContainsSubstring("</svg>"));
}

TEST_CASE("comparing a simulation with itself", "[io][compare]") {
    const auto g = fixtures::c3c4c3(0.25, 0.25);
    const auto scan = transmission_scan(g, 2.0, 20.0, 2000);
    const auto m = io::read_touchstone(io::write_touchstone(io::from_scan(scan)));
    const auto r = compare(m, g, 0.0);
    CHECK(r.rms < 1e-12);
    CHECK(r.residual.size() == 2000);
    for (const auto& p : r.peaks) CHECK(std::abs(p.offset_hz) < 1e-3);
}

TEST_CASE("absorption lowers the simulated peaks", "[io][compare]") {
    const auto g = fixtures::c3c4c3(0.25, 0.25);
    const double l = 0.25;
    const auto lossless = io::from_scan(transmission_scan(g, 0.5 * std::numbers::pi / l, 1.5 * std::numbers::pi / l, 20001));
    const auto r = compare(lossless, g, 0.009, {0.05});
    REQUIRE(!r.peaks.empty());
    for (const auto& p : r.peaks) {
        const auto i = static_cast<std::size_t>(
            std::lower_bound(r.frequency_hz.begin(), r.frequency_hz.end(), p.measured_hz) - r.frequency_hz.begin());
        CHECK(r.residual[i] > 0.0);
    }
    CHECK(r.rms > 0.0);
}

TEST_CASE("a known frequency shift is reported", "[io][compare]") {
    const auto g = fixtures::c3c4c3(0.25, 0.25);
    const double shift = 2.0e6;
    auto grid = uniform_grid(wavenumber_from_frequency(0.35e9), wavenumber_from_frequency(0.55e9), 6001);
    auto shifted = grid;
    for (auto& k : shifted) k = wavenumber_from_frequency(frequency_from_wavenumber(k) - shift);
    auto m = io::from_scan(scan_grid(g, shifted, 0.0));
    for (auto& f : m.frequency_hz) f += shift;
    const auto r = compare(m, g, 0.0, {0.5});
    REQUIRE(!r.peaks.empty());
    const double df = (0.55e9 - 0.35e9) / 6000;
    for (const auto& p : r.peaks) CHECK(p.offset_hz == Approx(shift).margin(0.1 * df));
}

TEST_CASE("comparison needs overlap", "[io][compare][errors]") {
    io::MeasuredTwoPort m;
    m.frequency_hz = {1e9};
    m.s11 = m.s12 = m.s21 = m.s22 = {cplx{0, 0}};
    CHECK_THROWS_AS(compare(m, fixtures::c3c4c3(0.25, 0.25), 0.0), std::invalid_argument);
}

#pragma once

// Graph documents (JSON), Touchstone v1 two-port files, CSV/JSON export and
// minimal SVG line charts.

#include "qgraph/graph.hpp"
#include "qgraph/scattering.hpp"
#include "qgraph/time_domain.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <unistd.h>
#include <vector>

namespace qgraph::io {

using json = nlohmann::json;

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Number formatting
// ---------------------------------------------------------------------------

/// Shortest round-trip decimal representation, always with '.' separator.
inline std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

/// Locale-independent parse of a whole token.
inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double x = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), x);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ParseError("not a number: '" + std::string(s) + "'");
    return x;
}

// ---------------------------------------------------------------------------
// Graph documents
// ---------------------------------------------------------------------------

namespace detail {

inline std::string line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path + "." + key + ": missing field");
    return *it;
}

inline double positive_length(const json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError(path + ": expected a number");
    const double x = v.get<double>();
    if (!(x > 0.0) || !std::isfinite(x)) throw ParseError(path + ": length must be positive and finite");
    return x;
}

inline std::string string_field(const json& v, const std::string& path) {
    if (!v.is_string()) throw ParseError(path + ": expected a string");
    return v.get<std::string>();
}

inline MetricGraph parse_chain(const json& c) {
    const std::string p = "$.chain";
    const auto& sizes = require(c, "polygon_sizes", p);
    const auto& lengths = require(c, "polygon_edge_lengths_m", p);
    const auto& conn = require(c, "connector_length_m", p);
    if (!sizes.is_array() || sizes.empty()) throw ParseError(p + ".polygon_sizes: expected a non-empty array");
    if (!lengths.is_array()) throw ParseError(p + ".polygon_edge_lengths_m: expected an array");
    if (lengths.size() != sizes.size())
        throw ParseError(p + ".polygon_edge_lengths_m: needs one length per polygon");
    PolygonChainSpec spec;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const auto path = p + ".polygon_sizes[" + std::to_string(i) + "]";
        if (!sizes[i].is_number_integer() || sizes[i].get<long long>() < 3)
            throw ParseError(path + ": polygon size must be an integer >= 3");
        spec.polygon_sizes.push_back(sizes[i].get<int>());
        spec.polygon_edge_lengths.push_back(
            positive_length(lengths[i], p + ".polygon_edge_lengths_m[" + std::to_string(i) + "]"));
    }
    if (sizes.size() > 1) {
        spec.connector_length = positive_length(conn, p + ".connector_length_m");
    } else {
        if (!conn.is_number() || conn.get<double>() < 0.0)
            throw ParseError(p + ".connector_length_m: expected a non-negative number");
        spec.connector_length = conn.get<double>();
    }
    return build_polygon_chain(spec);
}

}  // namespace detail

/// Parses a JSON graph document: either explicit `vertices`, `edges`,
/// `leads` lists or a `chain` shorthand.
inline MetricGraph parse_graph_document(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("invalid JSON at " + detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError("$: expected a JSON object");
    const bool has_chain = doc.contains("chain");
    const bool has_explicit = doc.contains("vertices") || doc.contains("edges") || doc.contains("leads");
    if (has_chain && has_explicit) throw ParseError("$: 'chain' cannot be combined with explicit vertices/edges/leads");
    if (has_chain) return detail::parse_chain(doc["chain"]);

    const auto& vs = detail::require(doc, "vertices", "$");
    const auto& es = detail::require(doc, "edges", "$");
    if (!vs.is_array()) throw ParseError("$.vertices: expected an array");
    if (!es.is_array()) throw ParseError("$.edges: expected an array");

    std::vector<std::string> vertices;
    for (std::size_t i = 0; i < vs.size(); ++i)
        vertices.push_back(detail::string_field(vs[i], "$.vertices[" + std::to_string(i) + "]"));
    auto vertex_ref = [&](const json& v, const std::string& path) {
        const auto name = detail::string_field(v, path);
        const auto it = std::find(vertices.begin(), vertices.end(), name);
        if (it == vertices.end()) throw ParseError(path + ": unknown vertex '" + name + "'");
        return static_cast<std::size_t>(it - vertices.begin());
    };

    std::vector<Edge> edges;
    for (std::size_t i = 0; i < es.size(); ++i) {
        const auto p = "$.edges[" + std::to_string(i) + "]";
        Edge e;
        e.id = detail::string_field(detail::require(es[i], "id", p), p + ".id");
        e.u = vertex_ref(detail::require(es[i], "u", p), p + ".u");
        e.v = vertex_ref(detail::require(es[i], "v", p), p + ".v");
        e.length = detail::positive_length(detail::require(es[i], "length_m", p), p + ".length_m");
        edges.push_back(e);
    }

    std::vector<Lead> leads;
    if (doc.contains("leads")) {
        const auto& ls = doc["leads"];
        if (!ls.is_array()) throw ParseError("$.leads: expected an array");
        for (std::size_t i = 0; i < ls.size(); ++i) {
            const auto p = "$.leads[" + std::to_string(i) + "]";
            Lead l;
            l.id = detail::string_field(detail::require(ls[i], "id", p), p + ".id");
            l.vertex = vertex_ref(detail::require(ls[i], "vertex", p), p + ".vertex");
            leads.push_back(l);
        }
    }
    try {
        return MetricGraph(std::move(vertices), std::move(edges), std::move(leads));
    } catch (const std::invalid_argument& e) {
        throw ParseError(std::string("$: ") + e.what());
    }
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline MetricGraph parse_graph_file(const std::filesystem::path& path) {
    try {
        return parse_graph_document(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

inline json graph_to_json(const MetricGraph& g) {
    json doc;
    doc["vertices"] = g.vertices();
    doc["edges"] = json::array();
    for (const auto& e : g.edges())
        doc["edges"].push_back({{"id", e.id}, {"u", g.vertices()[e.u]}, {"v", g.vertices()[e.v]}, {"length_m", e.length}});
    doc["leads"] = json::array();
    for (const auto& l : g.leads()) doc["leads"].push_back({{"id", l.id}, {"vertex", g.vertices()[l.vertex]}});
    return doc;
}

// ---------------------------------------------------------------------------
// Touchstone v1
// ---------------------------------------------------------------------------

struct MeasuredTwoPort {
    std::vector<double> frequency_hz;
    std::vector<cplx> s11, s21, s12, s22;
    double reference_impedance = 50.0;

    std::size_t size() const { return frequency_hz.size(); }
};

enum class TouchstoneFormat { RI, MA, DB };

namespace detail {

inline std::string upper(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

inline cplx decode_pair(double a, double b, TouchstoneFormat f) {
    constexpr double deg = std::numbers::pi / 180.0;
    switch (f) {
        case TouchstoneFormat::RI: return {a, b};
        case TouchstoneFormat::MA: return std::polar(a, b * deg);
        case TouchstoneFormat::DB: return std::polar(std::pow(10.0, a / 20.0), b * deg);
    }
    return {};
}

}  // namespace detail

/// Reads a two-port Touchstone v1 document. Frequencies are returned in Hz.
inline MeasuredTwoPort read_touchstone(std::string_view text) {
    double unit = 1e9;
    auto format = TouchstoneFormat::MA;
    MeasuredTwoPort m;
    bool seen_option = false;
    std::vector<double> values;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string line(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto bang = line.find('!'); bang != std::string::npos) line.erase(bang);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        if (tok[0] == '#') {
            if (seen_option) continue;  // only the first option line counts
            seen_option = true;
            std::vector<std::string> toks;
            if (tok.size() > 1) toks.push_back(detail::upper(tok.substr(1)));
            while (ls >> tok) toks.push_back(detail::upper(tok));
            for (std::size_t i = 0; i < toks.size(); ++i) {
                const auto& t = toks[i];
                if (t == "HZ") unit = 1.0;
                else if (t == "KHZ") unit = 1e3;
                else if (t == "MHZ") unit = 1e6;
                else if (t == "GHZ") unit = 1e9;
                else if (t == "S") {}
                else if (t == "Y" || t == "Z" || t == "H" || t == "G")
                    throw ParseError("line " + std::to_string(line_no) + ": only S parameters are supported");
                else if (t == "RI") format = TouchstoneFormat::RI;
                else if (t == "MA") format = TouchstoneFormat::MA;
                else if (t == "DB") format = TouchstoneFormat::DB;
                else if (t == "R") {
                    if (i + 1 >= toks.size())
                        throw ParseError("line " + std::to_string(line_no) + ": option 'R' needs an impedance");
                    try {
                        m.reference_impedance = parse_double(toks[++i]);
                    } catch (const ParseError&) {
                        throw ParseError("line " + std::to_string(line_no) + ": bad reference impedance");
                    }
                } else {
                    throw ParseError("line " + std::to_string(line_no) + ": malformed option line, unknown token '" +
                                     t + "'");
                }
            }
            continue;
        }
        do {
            try {
                values.push_back(parse_double(tok));
            } catch (const ParseError&) {
                throw ParseError("line " + std::to_string(line_no) + ": not a number: '" + tok + "'");
            }
        } while (ls >> tok);
    }
    if (values.size() % 9 != 0) throw ParseError("data does not form complete 9-value two-port rows");
    for (std::size_t r = 0; r < values.size(); r += 9) {
        const double f = values[r] * unit;
        if (!m.frequency_hz.empty() && !(f > m.frequency_hz.back()))
            throw ParseError("frequencies must be strictly increasing (row " + std::to_string(r / 9 + 1) + ")");
        m.frequency_hz.push_back(f);
        // v1 two-port order: S11 S21 S12 S22
        m.s11.push_back(detail::decode_pair(values[r + 1], values[r + 2], format));
        m.s21.push_back(detail::decode_pair(values[r + 3], values[r + 4], format));
        m.s12.push_back(detail::decode_pair(values[r + 5], values[r + 6], format));
        m.s22.push_back(detail::decode_pair(values[r + 7], values[r + 8], format));
    }
    return m;
}

inline std::string write_touchstone(const MeasuredTwoPort& m, TouchstoneFormat format = TouchstoneFormat::RI) {
    std::ostringstream out;
    const char* f = format == TouchstoneFormat::RI ? "RI" : format == TouchstoneFormat::MA ? "MA" : "DB";
    out << "! two-port S-parameters\n# HZ S " << f << " R " << fmt(m.reference_impedance) << "\n";
    auto pair = [&](cplx z) {
        constexpr double deg = 180.0 / std::numbers::pi;
        switch (format) {
            case TouchstoneFormat::RI: return fmt(z.real()) + " " + fmt(z.imag());
            case TouchstoneFormat::MA: return fmt(std::abs(z)) + " " + fmt(std::arg(z) * deg);
            case TouchstoneFormat::DB: return fmt(20.0 * std::log10(std::abs(z))) + " " + fmt(std::arg(z) * deg);
        }
        return std::string{};
    };
    for (std::size_t i = 0; i < m.size(); ++i)
        out << fmt(m.frequency_hz[i]) << ' ' << pair(m.s11[i]) << ' ' << pair(m.s21[i]) << ' ' << pair(m.s12[i]) << ' '
            << pair(m.s22[i]) << '\n';
    return out.str();
}

inline MeasuredTwoPort from_scan(const SpectrumScan& scan) {
    MeasuredTwoPort m;
    for (const auto& s : scan.values) {
        m.frequency_hz.push_back(s.frequency());
        m.s11.push_back(s.s11);
        m.s21.push_back(s.s21);
        m.s12.push_back(s.s12);
        m.s22.push_back(s.s22);
    }
    return m;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// Writes `content` to a temporary sibling and renames it over `path`.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto '" + path.string() + "': " + ec.message());
    }
}

inline const char* spectrum_columns =
    "k_rad_per_m,kl_over_pi,nu_hz,s11_re,s11_im,s12_re,s12_im,s21_re,s21_im,s22_re,s22_im,T";

/// One row per scan point; `l` is the reference length for kl/pi.
inline std::string spectrum_csv(const SpectrumScan& scan, double l) {
    std::string out = spectrum_columns;
    out += '\n';
    for (const auto& s : scan.values) {
        const cplx v[] = {s.s11, s.s12, s.s21, s.s22};
        out += fmt(s.k) + ',' + fmt(s.k * l / std::numbers::pi) + ',' + fmt(s.frequency());
        for (const auto& z : v) out += ',' + fmt(z.real()) + ',' + fmt(z.imag());
        out += ',' + fmt(s.transmission()) + '\n';
    }
    return out;
}

inline json spectrum_json(const SpectrumScan& scan, double l) {
    json j;
    j["beta"] = scan.beta;
    j["reference_length_m"] = l;
    j["columns"] = {"k_rad_per_m", "kl_over_pi", "nu_hz", "s11_re", "s11_im", "s12_re", "s12_im",
                    "s21_re",      "s21_im",     "s22_re", "s22_im", "T"};
    j["rows"] = json::array();
    for (const auto& s : scan.values)
        j["rows"].push_back({s.k, s.k * l / std::numbers::pi, s.frequency(), s.s11.real(), s.s11.imag(), s.s12.real(),
                             s.s12.imag(), s.s21.real(), s.s21.imag(), s.s22.real(), s.s22.imag(), s.transmission()});
    j["defects"] = json::array();
    for (const auto& d : scan.defects) j["defects"].push_back({{"k", d.k}, {"message", d.message}});
    return j;
}

inline std::string trace_csv(const TimeTrace& tr) {
    std::string out = "t_seconds,volts\n";
    for (std::size_t i = 0; i < tr.size(); ++i) out += fmt(tr.time(i)) + ',' + fmt(tr.volts[i]) + '\n';
    return out;
}

inline json trace_json(const TimeTrace& tr) {
    json j;
    j["t0_seconds"] = tr.grid.start;
    j["dt_seconds"] = tr.grid.dt;
    j["volts"] = tr.volts;
    return j;
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

struct Series {
    std::string name;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
};

namespace detail {
inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}
}  // namespace detail

/// Standalone SVG line chart with axes, tick labels and a legend.
inline std::string svg_line_chart(const std::vector<Series>& series, const std::string& title,
                                  const std::string& xlabel, const std::string& ylabel) {
    const double w = 800, h = 450, ml = 70, mr = 20, mt = 40, mb = 55;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pad = 0.04 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - y0) / (y1 - y0) * (h - mt - mb); };
    auto num = [](double v) {
        std::ostringstream s;
        s.imbue(std::locale::classic());
        s.precision(4);
        s << v;
        return s.str();
    };

    std::ostringstream o;
    o.imbue(std::locale::classic());
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << detail::escape_xml(title)
      << "</text>\n";
    o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\"" << h - mt - mb
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double xv = x0 + (x1 - x0) * t / 5.0, yv = y0 + (y1 - y0) * t / 5.0;
        o << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"middle\">" << num(xv)
          << "</text>\n";
        o << "<text x=\"" << ml - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
    }
    o << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">"
      << detail::escape_xml(xlabel) << "</text>\n";
    o << "<text x=\"16\" y=\"" << (mt + h - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (mt + h - mb) / 2 << ")\">" << detail::escape_xml(ylabel) << "</text>\n";
    int legend = 0;
    for (const auto& s : series) {
        o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        o << "\"/>\n";
        if (!s.name.empty()) {
            const double ly = mt + 16 + 16 * legend++;
            o << "<line x1=\"" << w - mr - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << w - mr - 130 << "\" y2=\""
              << ly - 4 << "\" stroke=\"" << s.color << "\"/>\n";
            o << "<text x=\"" << w - mr - 125 << "\" y=\"" << ly << "\">" << detail::escape_xml(s.name) << "</text>\n";
        }
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace qgraph::io

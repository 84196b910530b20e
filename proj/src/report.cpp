#include <esaccel/report.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace esaccel {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fixed2(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, r.ptr);
}

std::string short_label(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
    return std::string(buf, r.ptr);
}

std::string csv_quote(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    while (true) {
        const auto comma = line.find(',');
        cells.push_back(line.substr(0, comma));
        if (comma == std::string_view::npos) break;
        line = line.substr(comma + 1);
    }
    return cells;
}

double parse_cell(std::string_view cell) {
    if (cell == "nan") return kNaN;
    double v = kNaN;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) return kNaN;
    return v;
}

double pow10_floor(double v) { return std::pow(10.0, std::floor(std::log10(std::abs(v)))); }

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return std::string(buf, r.ptr);
}

std::string trace_csv(const ScenarioResult& result, const std::vector<std::string>& columns) {
    const auto& known = known_columns();
    for (const auto& c : columns) {
        if (std::find(known.begin(), known.end(), c) == known.end()) {
            throw std::invalid_argument("unknown trace column '" + c + "'");
        }
    }
    const auto& s = result.series;
    const double l_true = result.config.l_true();
    const bool drift = is_drift(result.config.model);
    std::string out;
    for (std::size_t j = 0; j < columns.size(); ++j) out += (j ? "," : "") + columns[j];
    out += '\n';
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double t = s.t_grid[i];
        for (std::size_t j = 0; j < columns.size(); ++j) {
            if (j) out += ',';
            const auto& c = columns[j];
            if (c == "t") {
                out += format_number(t);
            } else if (c == "x_classical") {
                out += format_number(result.trajectory.at(t));
            } else if (c == "g") {
                out += format_number(s.g_values[i]);
            } else if (c == "theta_hat") {
                out += format_number(s.theta_hat[i]);
            } else if (c == "l_hat") {
                out += format_number(s.l_hat[i]);
            } else if (c == "valid") {
                out += s.valid(i) ? '1' : '0';
            } else if (c == "residual") {
                out += format_number(std::abs(s.l_hat[i] - l_true));
            } else if (c == "drift") {
                out += format_number(drift ? result.config.drift.drift(t) : 0.0);
            }
        }
        out += '\n';
    }
    return out;
}

std::string trace_csv(const ScenarioResult& result) { return trace_csv(result, result.config.outputs); }

std::string summary_text(const RunSummary& r) {
    std::ostringstream os;
    os << "theta_exact = " << format_number(r.theta_exact) << "\n"
       << "theta_extracted_final = " << format_number(r.theta_extracted_final) << "\n"
       << "l_residual_max_tail = " << format_number(r.l_residual_max_tail) << "\n"
       << "classical_residual_max_tail = " << format_number(r.classical_residual_max_tail) << "\n"
       << "gamma = " << (r.gamma ? format_number(*r.gamma) : std::string("none")) << "\n"
       << "clamp_fraction = " << format_number(r.clamp_fraction) << "\n"
       << "valid_fraction = " << format_number(r.valid_fraction) << "\n"
       << "dominant = " << (r.dominant ? "true" : "false") << "\n"
       << "breakdown = " << (r.breakdown ? "true" : "false") << "\n";
    return os.str();
}

std::string sweep_table_csv(std::string_view axis, const std::vector<SweepEntry>& entries) {
    std::string out = std::string(axis) +
                      ",status,theta_exact,theta_extracted_final,l_residual_max_tail,"
                      "classical_residual_max_tail,gamma,clamp_fraction,dominant,breakdown,error\n";
    for (const auto& e : entries) {
        out += format_number(e.value);
        if (e.result) {
            const auto& r = e.result->summary;
            out += ",ok," + format_number(r.theta_exact) + "," + format_number(r.theta_extracted_final) +
                   "," + format_number(r.l_residual_max_tail) + "," +
                   format_number(r.classical_residual_max_tail) + "," +
                   (r.gamma ? format_number(*r.gamma) : std::string("none")) + "," +
                   format_number(r.clamp_fraction) + "," + (r.dominant ? "1" : "0") + "," +
                   (r.breakdown ? "1" : "0") + ",\n";
        } else {
            out += ",failed,nan,nan,nan,nan,nan,nan,0,0," + csv_quote(e.error) + "\n";
        }
    }
    return out;
}

double round_down_1sig(double v) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    const double m = pow10_floor(v);
    return std::floor(v / m) * m;
}

double round_up_1sig(double v) {
    if (v == 0.0 || !std::isfinite(v)) return v;
    const double m = pow10_floor(v);
    return std::ceil(v / m) * m;
}

std::string svg_from_csv(std::string_view csv, std::string_view title) {
    constexpr double kW = 800, kH = 500, kLeft = 70, kRight = 130, kTop = 40, kBottom = 50;
    static const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                           "#ff7f0e", "#8c564b", "#17becf"};

    std::vector<std::string_view> lines;
    while (!csv.empty()) {
        const auto nl = csv.find('\n');
        lines.push_back(csv.substr(0, nl));
        csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    }
    if (lines.empty()) throw std::invalid_argument("svg_from_csv: no header row");
    const auto header = split_row(lines.front());
    const std::size_t ncol = header.size();
    std::vector<std::vector<double>> cols(ncol);
    for (std::size_t r = 1; r < lines.size(); ++r) {
        if (lines[r].empty()) continue;
        const auto cells = split_row(lines[r]);
        if (cells.size() != ncol) throw std::invalid_argument("svg_from_csv: ragged row");
        for (std::size_t c = 0; c < ncol; ++c) cols[c].push_back(parse_cell(cells[c]));
    }

    std::vector<std::size_t> plotted;
    for (std::size_t c = 1; c < ncol; ++c) {
        if (header[c] != "valid") plotted.push_back(c);
    }
    auto extent = [](const std::vector<double>& v, double& lo, double& hi) {
        for (double x : v) {
            if (!std::isfinite(x)) continue;
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    };
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
    double y_lo = x_lo, y_hi = -x_lo;
    if (ncol > 0) extent(cols[0], x_lo, x_hi);
    for (auto c : plotted) extent(cols[c], y_lo, y_hi);
    auto settle = [](double& lo, double& hi) {
        if (!std::isfinite(lo)) {
            lo = 0.0;
            hi = 1.0;
        }
        lo = round_down_1sig(lo);
        hi = round_up_1sig(hi);
        if (lo == hi) {
            lo -= 1.0;
            hi += 1.0;
        }
    };
    settle(x_lo, x_hi);
    settle(y_lo, y_hi);

    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
    auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n"
       << "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n"
       << "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
       << xml_escape(title) << "</text>\n"
       << "<rect x=\"" << fixed2(kLeft) << "\" y=\"" << fixed2(kTop) << "\" width=\"" << fixed2(pw)
       << "\" height=\"" << fixed2(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = x_lo + (x_hi - x_lo) * i / 4.0;
        const double fy = y_lo + (y_hi - y_lo) * i / 4.0;
        os << "<text x=\"" << fixed2(px(fx)) << "\" y=\"" << fixed2(kH - kBottom + 18)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << short_label(fx)
           << "</text>\n"
           << "<text x=\"" << fixed2(kLeft - 6) << "\" y=\"" << fixed2(py(fy) + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << short_label(fy)
           << "</text>\n";
    }
    if (ncol > 0) {
        os << "<text x=\"" << fixed2(kLeft + pw / 2) << "\" y=\"" << fixed2(kH - 10)
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
           << xml_escape(header[0]) << "</text>\n";
    }

    for (std::size_t k = 0; k < plotted.size(); ++k) {
        const auto c = plotted[k];
        const char* colour = kPalette[k % std::size(kPalette)];
        std::string points;
        auto flush = [&] {
            if (!points.empty()) {
                os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\""
                   << points << "\"/>\n";
                points.clear();
            }
        };
        for (std::size_t r = 0; r < cols[c].size(); ++r) {
            const double x = cols[0][r], y = cols[c][r];
            if (!std::isfinite(x) || !std::isfinite(y)) {
                flush();
                continue;
            }
            if (!points.empty()) points += ' ';
            points += fixed2(px(x)) + "," + fixed2(py(y));
        }
        flush();
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
        os << "<line x1=\"" << fixed2(kW - kRight + 10) << "\" y1=\"" << fixed2(ly - 4) << "\" x2=\""
           << fixed2(kW - kRight + 30) << "\" y2=\"" << fixed2(ly - 4) << "\" stroke=\"" << colour
           << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << fixed2(kW - kRight + 35) << "\" y=\"" << fixed2(ly)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(header[c]) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace esaccel

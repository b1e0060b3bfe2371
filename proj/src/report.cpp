#include "trajclust/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "trajclust/errors.hpp"

namespace trajclust {

std::string format_number(double v) {
    if (is_na(v)) return "";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
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

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

const char* color_of(int i) {
    static const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
                                    "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b15928"};
    return palette[static_cast<std::size_t>(i < 0 ? 0 : i) % 10];
}

std::vector<double> nice_ticks(double lo, double hi) {
    if (!(hi > lo)) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + step * 1e-9; t += step) ticks.push_back(t);
    return ticks;
}

/// Draws one chart into a <g> placed at (x0, y0).
void render_panel(const Chart& chart, double x0, double y0, std::ostringstream& out) {
    const double left = 64.0;
    const double right = chart.legend ? 150.0 : 20.0;
    const double top = 36.0;
    const double bottom = 48.0;
    const double pw = chart.width - left - right;
    const double ph = chart.height - top - bottom;

    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = 0.0;
        xmax = 1.0;
        ymin = 0.0;
        ymax = 1.0;
    }
    const auto xt = nice_ticks(xmin, xmax);
    const auto yt = nice_ticks(ymin, ymax);
    const double xlo = std::min(xmin, xt.front());
    const double xhi = std::max(xmax, xt.back());
    const double ylo = std::min(ymin, yt.front());
    const double yhi = std::max(ymax, yt.back());
    auto sx = [&](double x) { return left + (xhi > xlo ? (x - xlo) / (xhi - xlo) : 0.5) * pw; };
    auto sy = [&](double y) { return top + ph - (yhi > ylo ? (y - ylo) / (yhi - ylo) : 0.5) * ph; };

    out << "<g transform=\"translate(" << px(x0) << "," << px(y0) << ")\">\n";
    out << "<text class=\"title\" x=\"" << px(left + pw / 2) << "\" y=\"20\" text-anchor=\"middle\">"
        << xml_escape(chart.title) << "</text>\n";
    out << "<rect x=\"" << px(left) << "\" y=\"" << px(top) << "\" width=\"" << px(pw) << "\" height=\"" << px(ph)
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double t : xt) {
        out << "<line x1=\"" << px(sx(t)) << "\" y1=\"" << px(top + ph) << "\" x2=\"" << px(sx(t)) << "\" y2=\""
            << px(top + ph + 5) << "\" stroke=\"#444\"/>";
        out << "<text x=\"" << px(sx(t)) << "\" y=\"" << px(top + ph + 18) << "\" text-anchor=\"middle\">"
            << tick_label(t) << "</text>\n";
    }
    for (double t : yt) {
        out << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(sy(t)) << "\" x2=\"" << px(left) << "\" y2=\""
            << px(sy(t)) << "\" stroke=\"#444\"/>";
        out << "<text x=\"" << px(left - 8) << "\" y=\"" << px(sy(t) + 4) << "\" text-anchor=\"end\">"
            << tick_label(t) << "</text>\n";
    }
    out << "<text class=\"x-label\" x=\"" << px(left + pw / 2) << "\" y=\"" << px(chart.height - 8.0)
        << "\" text-anchor=\"middle\">" << xml_escape(chart.x_label) << "</text>\n";
    out << "<text class=\"y-label\" x=\"14\" y=\"" << px(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << px(top + ph / 2) << ")\">" << xml_escape(chart.y_label) << "</text>\n";

    for (const auto& s : chart.series) {
        std::string points;
        std::string values;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!points.empty()) {
                points += ' ';
                values += ' ';
            }
            points += px(sx(s.x[i])) + "," + px(sy(s.y[i]));
            values += format_number(s.x[i]) + "," + format_number(s.y[i]);
        }
        out << "<polyline fill=\"none\" stroke=\"" << color_of(s.color) << "\" stroke-width=\"" << format_number(s.stroke_width)
            << "\"";
        if (s.opacity < 1.0) out << " stroke-opacity=\"" << format_number(s.opacity) << "\"";
        out << " data-label=\"" << xml_escape(s.label) << "\"";
        if (!s.name.empty()) out << " data-name=\"" << xml_escape(s.name) << "\"";
        out << " data-values=\"" << values << "\" points=\"" << points << "\"/>\n";
    }

    if (chart.legend) {
        std::vector<std::pair<std::string, int>> entries;
        for (const auto& s : chart.series) {
            if (s.label.empty()) continue;
            std::pair<std::string, int> e{s.label, s.color};
            if (std::find(entries.begin(), entries.end(), e) == entries.end()) entries.push_back(e);
        }
        double ly = top + 10.0;
        for (const auto& [label, color] : entries) {
            const double lx = left + pw + 14.0;
            out << "<line class=\"legend\" x1=\"" << px(lx) << "\" y1=\"" << px(ly) << "\" x2=\"" << px(lx + 20) << "\" y2=\""
                << px(ly) << "\" stroke=\"" << color_of(color) << "\" stroke-width=\"3\"/>";
            out << "<text x=\"" << px(lx + 26) << "\" y=\"" << px(ly + 4) << "\">" << xml_escape(label) << "</text>\n";
            ly += 18.0;
        }
    }
    out << "</g>\n";
}

std::string svg_document(int width, int height, const std::string& body) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<!-- generated by trajcluster -->\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << body;
    out << "</svg>\n";
    return out.str();
}

}  // namespace

std::string metric_table_csv(const MetricTable& table,
                             const std::vector<std::pair<std::string, std::vector<std::string>>>& extra_columns) {
    std::ostringstream out;
    out << "name";
    for (const auto& [col, vals] : extra_columns) out << ',' << csv_field(col);
    for (const auto& m : table.metrics) out << ',' << csv_field(m);
    out << '\n';
    for (std::size_t r = 0; r < table.row_names.size(); ++r) {
        out << csv_field(table.row_names[r]);
        for (const auto& [col, vals] : extra_columns) out << ',' << csv_field(r < vals.size() ? vals[r] : "");
        for (double v : table.values[r]) out << ',' << format_number(v);
        out << '\n';
    }
    return out.str();
}

std::string pairwise_csv(const PairwiseMatrix& m) {
    std::ostringstream out;
    out << "model";
    for (std::size_t j = 0; j + 1 < m.names.size(); ++j) out << ',' << csv_field(m.names[j]);
    out << '\n';
    for (std::size_t i = 1; i < m.names.size(); ++i) {
        out << csv_field(m.names[i]);
        for (std::size_t j = 0; j + 1 < m.names.size(); ++j) {
            out << ',';
            if (j < i) out << format_number(m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        }
        out << '\n';
    }
    return out.str();
}

std::string render_svg(const Chart& chart) {
    std::ostringstream body;
    render_panel(chart, 0.0, 0.0, body);
    return svg_document(chart.width, chart.height, body.str());
}

std::string plot_trajectories(const Dataset& ds, const std::vector<int>* groups,
                              const std::vector<std::string>* group_names) {
    Chart chart;
    chart.title = "Trajectories";
    chart.x_label = ds.columns().time;
    chart.y_label = ds.columns().response;
    chart.legend = groups != nullptr;
    for (std::size_t i = 0; i < ds.n_trajectories(); ++i) {
        Series s;
        s.name = ds.ids()[i];
        auto t = ds.times(i);
        auto v = ds.values(i);
        s.x.assign(t.begin(), t.end());
        s.y.assign(v.begin(), v.end());
        s.opacity = 0.5;
        if (groups != nullptr) {
            const int g = (*groups)[i];
            s.color = g;
            s.label = group_names != nullptr && static_cast<std::size_t>(g) < group_names->size()
                          ? (*group_names)[static_cast<std::size_t>(g)]
                          : std::to_string(g + 1);
        } else {
            s.color = 7;
        }
        chart.series.push_back(std::move(s));
    }
    return render_svg(chart);
}

std::string plot_cluster_trajectories(const ClusterModel& m, const std::vector<double>& times,
                                      const std::string& time_label, const std::string& response_label) {
    Chart chart;
    chart.title = "Cluster trajectories";
    chart.x_label = time_label;
    chart.y_label = response_label;
    const Eigen::MatrixXd y = cluster_trajectories(m, times);
    const Eigen::VectorXd pi = m.proportions();
    for (int k = 0; k < m.n_clusters(); ++k) {
        Series s;
        char pct[32];
        std::snprintf(pct, sizeof(pct), " (%.0f%%)", 100.0 * pi(k));
        s.label = m.cluster_names()[static_cast<std::size_t>(k)] + pct;
        s.name = m.cluster_names()[static_cast<std::size_t>(k)];
        s.x = times;
        for (Eigen::Index j = 0; j < y.cols(); ++j) s.y.push_back(y(k, j));
        s.color = k;
        s.stroke_width = 3.0;
        chart.series.push_back(std::move(s));
    }
    return render_svg(chart);
}

std::string plot_metric_sweep(const std::vector<std::string>& methods, const std::vector<int>& n_clusters,
                              const MetricTable& table) {
    if (methods.size() != table.row_names.size() || n_clusters.size() != table.row_names.size()) {
        throw Error(ErrorKind::Contract, "sweep plot needs one method and K per table row");
    }
    std::vector<std::string> distinct;
    for (const auto& m : methods) {
        if (std::find(distinct.begin(), distinct.end(), m) == distinct.end()) distinct.push_back(m);
    }
    const int panel_height = 260;
    const int width = 720;
    std::ostringstream body;
    for (std::size_t c = 0; c < table.metrics.size(); ++c) {
        Chart chart;
        chart.title = table.metrics[c];
        chart.x_label = "nClusters";
        chart.y_label = table.metrics[c];
        chart.width = width;
        chart.height = panel_height;
        for (std::size_t g = 0; g < distinct.size(); ++g) {
            Series s;
            s.label = distinct[g];
            s.name = distinct[g];
            s.color = static_cast<int>(g);
            s.stroke_width = 2.0;
            for (std::size_t r = 0; r < methods.size(); ++r) {
                if (methods[r] != distinct[g]) continue;
                s.x.push_back(n_clusters[r]);
                s.y.push_back(table.values[r][c]);
            }
            chart.series.push_back(std::move(s));
        }
        render_panel(chart, 0.0, static_cast<double>(c) * panel_height, body);
    }
    const int height = std::max<int>(1, static_cast<int>(table.metrics.size())) * panel_height;
    return svg_document(width, height, body.str());
}

}  // namespace trajclust

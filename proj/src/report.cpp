#include "ccep/report.hpp"

#include <algorithm>
#include <cstdio>

#include "ccep/file_io.hpp"
#include "ccep/toml_lite.hpp"

namespace ccep {
namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string svg_header(int w, int h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) + "\" height=\"" +
         std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) + " " + std::to_string(h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle") {
  return "<text x=\"" + fmt("%.1f", x) + "\" y=\"" + fmt("%.1f", y) + "\" text-anchor=\"" + anchor + "\">" + s +
         "</text>\n";
}

std::vector<std::size_t> widths_of(const StoredEntry& e) {
  std::vector<std::size_t> w;
  for (const auto& l : e.layers) w.push_back(l.width);
  return w;
}

}  // namespace

std::string curve_csv(const StoredArchive& archive) {
  const double base = archive.baseline.metrics.test_accuracy;
  std::string out = "iteration,flops_reduction,test_acc,acc_drop\n";
  out += "0," + fmt("%.6f", 0.0) + "," + fmt("%.6f", base) + "," + fmt("%.6f", 0.0) + "\n";
  for (const auto& e : archive.entries)
    out += std::to_string(e.iteration) + "," + fmt("%.6f", e.metrics.flops_reduction) + "," +
           fmt("%.6f", e.metrics.test_accuracy) + "," + fmt("%.6f", base - e.metrics.test_accuracy) + "\n";
  return out;
}

std::string widths_csv(const StoredArchive& archive) {
  std::string out = "iteration,layer,width\n";
  const auto& b = archive.baseline;
  for (std::size_t k = 0; k < b.widths.size(); ++k)
    out += "0," + std::to_string(b.layer_indices[k]) + "," + std::to_string(b.widths[k]) + "\n";
  for (const auto& e : archive.entries)
    for (const auto& l : e.layers)
      out += std::to_string(e.iteration) + "," + std::to_string(l.layer) + "," + std::to_string(l.width) + "\n";
  return out;
}

std::string report_table(const StoredArchive& archive) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-9s %-22s %10s %10s %10s  %s\n", "iteration", "test_acc", "flops", "params",
                "reduction", "widths");
  out += line;
  auto row = [&](std::size_t it, const StoredMetrics& m, const std::vector<std::size_t>& widths) {
    std::string w;
    for (std::size_t k = 0; k < widths.size(); ++k) w += (k ? "-" : "") + std::to_string(widths[k]);
    std::snprintf(line, sizeof(line), "%-9zu %-22s %10llu %10llu %9.2f%%  %s\n", it,
                  toml::format_double(m.test_accuracy).c_str(), static_cast<unsigned long long>(m.flops),
                  static_cast<unsigned long long>(m.params), 100.0 * m.flops_reduction, w.c_str());
    out += line;
  };
  row(0, archive.baseline.metrics, archive.baseline.widths);
  for (const auto& e : archive.entries) row(e.iteration, e.metrics, widths_of(e));
  return out;
}

std::string curve_svg(const StoredArchive& archive) {
  const int W = 480, H = 320, L = 60, R = 20, T = 20, B = 45;
  std::vector<std::pair<double, double>> pts{{0.0, archive.baseline.metrics.test_accuracy}};
  for (const auto& e : archive.entries) pts.emplace_back(e.metrics.flops_reduction, e.metrics.test_accuracy);
  double lo = 1.0, hi = 0.0, xmax = 0.0;
  for (auto [x, y] : pts) {
    lo = std::min(lo, y);
    hi = std::max(hi, y);
    xmax = std::max(xmax, x);
  }
  if (hi - lo < 1e-3) {
    lo -= 0.005;
    hi += 0.005;
  }
  xmax = std::max(xmax, 0.1);
  auto px = [&](double x) { return L + (W - L - R) * x / xmax; };
  auto py = [&](double y) { return T + (H - T - B) * (hi - y) / (hi - lo); };

  std::string s = svg_header(W, H);
  s += "<line x1=\"" + std::to_string(L) + "\" y1=\"" + std::to_string(H - B) + "\" x2=\"" + std::to_string(W - R) +
       "\" y2=\"" + std::to_string(H - B) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + std::to_string(L) + "\" y1=\"" + std::to_string(T) + "\" x2=\"" + std::to_string(L) +
       "\" y2=\"" + std::to_string(H - B) + "\" stroke=\"black\"/>\n";
  s += text(L, H - B + 14, "0%") + text(W - R, H - B + 14, fmt("%.0f%%", 100.0 * xmax));
  s += text(L - 4, py(hi) + 4, fmt("%.3f", hi), "end") + text(L - 4, py(lo) + 4, fmt("%.3f", lo), "end");
  s += text((L + W - R) / 2.0, H - 10, "FLOPs reduction") + text(14, T - 6, "test accuracy", "start");
  s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i)
    s += (i ? " " : "") + fmt("%.1f", px(pts[i].first)) + "," + fmt("%.1f", py(pts[i].second));
  s += "\"/>\n";
  for (auto [x, y] : pts)
    s += "<circle cx=\"" + fmt("%.1f", px(x)) + "\" cy=\"" + fmt("%.1f", py(y)) + "\" r=\"3\" fill=\"steelblue\"/>\n";
  return s + "</svg>\n";
}

std::string widths_svg(const StoredArchive& archive) {
  std::vector<std::pair<std::size_t, std::vector<std::size_t>>> rows{{0, archive.baseline.widths}};
  for (const auto& e : archive.entries) rows.emplace_back(e.iteration, widths_of(e));
  const std::size_t n_layers = archive.baseline.widths.size();
  std::size_t wmax = 1;
  for (const auto& [it, w] : rows)
    for (auto v : w) wmax = std::max(wmax, v);

  const double bar = 10.0, gap = 14.0, group_h = n_layers * bar + gap;
  const int L = 80, R = 20, T = 20;
  const int W = 480;
  const int H = static_cast<int>(T + rows.size() * group_h + 20);
  static const char* colors[] = {"#4c78a8", "#f58518", "#54a24b", "#e45756", "#72b7b2", "#b279a2"};
  std::string s = svg_header(W, H);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double y0 = T + r * group_h;
    s += text(L - 6, y0 + n_layers * bar / 2 + 4, "iter " + std::to_string(rows[r].first), "end");
    for (std::size_t k = 0; k < rows[r].second.size(); ++k) {
      const double w = (W - L - R) * static_cast<double>(rows[r].second[k]) / static_cast<double>(wmax);
      s += "<rect x=\"" + std::to_string(L) + "\" y=\"" + fmt("%.1f", y0 + k * bar) + "\" width=\"" + fmt("%.1f", w) +
           "\" height=\"" + fmt("%.1f", bar - 1) + "\" fill=\"" + colors[k % 6] + "\"/>\n";
    }
  }
  return s + "</svg>\n";
}

std::string write_report(const std::filesystem::path& archive_dir, const std::filesystem::path& out_dir) {
  const StoredArchive archive = read_archive(archive_dir);
  std::filesystem::create_directories(out_dir);
  const std::string table = report_table(archive);
  write_file_atomic(out_dir / "curve.csv", curve_csv(archive));
  write_file_atomic(out_dir / "curve.svg", curve_svg(archive));
  write_file_atomic(out_dir / "widths.csv", widths_csv(archive));
  write_file_atomic(out_dir / "widths.svg", widths_svg(archive));
  write_file_atomic(out_dir / "table.txt", table);
  return table;
}

}  // namespace ccep

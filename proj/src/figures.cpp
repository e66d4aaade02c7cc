// Copyright 2026 The CoMRAT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <string>

#include <fmt/format.h>

#include "comrat/report.hpp"

namespace comrat {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 30;
constexpr double kTop = 50;
constexpr double kBottom = 70;
constexpr double kPlotW = kWidth - kLeft - kRight;
constexpr double kPlotH = kHeight - kTop - kBottom;

constexpr const char* kDecisionColor = "#1f77b4";
constexpr const char* kRationaleColor = "#d62728";
constexpr const char* kNoneColor = "#7f7f7f";

std::string escape_xml(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

class Svg {
 public:
  explicit Svg(std::string_view title) {
    body_ += fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" viewBox=\"0 0 {0:.0f} "
        "{1:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        "<title>{2}</title>\n"
        "<rect x=\"0\" y=\"0\" width=\"{0:.0f}\" height=\"{1:.0f}\" fill=\"#ffffff\"/>\n",
        kWidth, kHeight, escape_xml(title));
    text(kWidth / 2, 28, title, "middle", 16);
  }

  void line(double x1, double y1, double x2, double y2, std::string_view stroke = "#000000") {
    body_ += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\"/>\n", x1, y1,
                         x2, y2, stroke);
  }

  void rect(double x, double y, double w, double h, std::string_view fill) {
    body_ += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", x, y,
                         w, h, fill);
  }

  void circle(double cx, double cy, double r, std::string_view fill) {
    body_ += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\" fill-opacity=\"0.6\"/>\n", cx,
                         cy, r, fill);
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, std::string_view stroke) {
    std::string points;
    for (const auto& [x, y] : pts) points += fmt::format("{}{:.2f},{:.2f}", points.empty() ? "" : " ", x, y);
    body_ += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\"/>\n", points,
                         stroke);
  }

  void text(double x, double y, std::string_view s, std::string_view anchor = "start", int size = 12) {
    body_ += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"{}\" font-size=\"{}\">{}</text>\n", x, y,
                         anchor, size, escape_xml(s));
  }

  void rotated_text(double x, double y, std::string_view s) {
    body_ += fmt::format(
        "<text x=\"{0:.2f}\" y=\"{1:.2f}\" text-anchor=\"end\" transform=\"rotate(-45 {0:.2f} {1:.2f})\">{2}</text>\n",
        x, y, escape_xml(s));
  }

  // Axes with a vertical scale from 0 to y_max.
  void axes(std::string_view x_label, std::string_view y_label, double y_max) {
    line(kLeft, kTop, kLeft, kTop + kPlotH);
    line(kLeft, kTop + kPlotH, kLeft + kPlotW, kTop + kPlotH);
    for (int t = 0; t <= 4; ++t) {
      const double y = kTop + kPlotH - kPlotH * t / 4.0;
      line(kLeft - 4, y, kLeft, y);
      text(kLeft - 8, y + 4, fmt::format("{:.2f}", y_max * t / 4.0), "end");
    }
    text(kLeft + kPlotW / 2, kHeight - 12, x_label, "middle");
    body_ += fmt::format(
        "<text x=\"16\" y=\"{0:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.2f})\">{1}</text>\n",
        kTop + kPlotH / 2, escape_xml(y_label));
  }

  void no_data() { text(kLeft + kPlotW / 2, kTop + kPlotH / 2, "no data", "middle", 14); }

  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double x = kLeft + kPlotW - 130;
    double y = kTop + 4;
    for (const auto& [label, color] : entries) {
      rect(x, y, 10, 10, color);
      text(x + 16, y + 9, label);
      y += 16;
    }
  }

  std::string finish() { return body_ + "</svg>\n"; }

 private:
  std::string body_;
};

double y_of(double value, double y_max) { return kTop + kPlotH - (y_max > 0 ? value / y_max : 0.0) * kPlotH; }

std::string factor_scatter(const AnalysisReport& r) {
  Svg svg("Rationale density vs. commit message size");
  svg.axes("Number of sentences in commit", "Rationale density", 1.0);
  if (r.size_series.empty()) {
    svg.no_data();
    return svg.finish();
  }
  std::size_t max_size = 1;
  for (const auto& p : r.size_series) max_size = std::max(max_size, p.size);
  for (int t = 0; t <= 4; ++t) {
    const double x = kLeft + kPlotW * t / 4.0;
    svg.line(x, kTop + kPlotH, x, kTop + kPlotH + 4);
    svg.text(x, kTop + kPlotH + 18, fmt::format("{:.1f}", max_size * t / 4.0), "middle");
  }
  for (const auto& p : r.size_series) {
    svg.circle(kLeft + kPlotW * static_cast<double>(p.size) / static_cast<double>(max_size),
               y_of(p.rationale_density, 1.0), 4, kRationaleColor);
  }
  return svg.finish();
}

std::string author_bars(const AnalysisReport& r) {
  constexpr std::size_t kMaxAuthors = 30;
  Svg svg("Average rationale density per author");
  svg.axes("Authors (by number of commits)", "Average rationale density", 1.0);
  const auto n = std::min(kMaxAuthors, r.author_series.size());
  if (n == 0) {
    svg.no_data();
    return svg.finish();
  }
  const double slot = kPlotW / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = r.author_series[i];
    const double x = kLeft + slot * static_cast<double>(i);
    const double density = a.avg_rationale_density.value_or(0.0);
    const double y = y_of(density, 1.0);
    svg.rect(x + slot * 0.15, y, slot * 0.7, kTop + kPlotH - y, kRationaleColor);
    svg.text(x + slot / 2, y - 4, fmt::format("n={}", a.n_commits), "middle", 9);
  }
  return svg.finish();
}

std::string evolution_lines(const AnalysisReport& r) {
  Svg svg("Rationale and decision density per year");
  svg.axes("Year", "Average density", 1.0);
  if (r.evolution.empty()) {
    svg.no_data();
    return svg.finish();
  }
  const auto n = r.evolution.size();
  auto x_of = [&](std::size_t i) {
    return n == 1 ? kLeft + kPlotW / 2 : kLeft + kPlotW * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  std::vector<std::pair<double, double>> rat;
  std::vector<std::pair<double, double>> dec;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& y = r.evolution[i];
    rat.emplace_back(x_of(i), y_of(y.avg_rationale_density, 1.0));
    dec.emplace_back(x_of(i), y_of(y.avg_decision_density, 1.0));
    svg.text(x_of(i), kTop + kPlotH + 18, std::to_string(y.year), "middle", 10);
  }
  svg.polyline(rat, kRationaleColor);
  svg.polyline(dec, kDecisionColor);
  for (std::size_t i = 0; i < n; ++i) {
    svg.circle(rat[i].first, rat[i].second, 3, kRationaleColor);
    svg.circle(dec[i].first, dec[i].second, 3, kDecisionColor);
  }
  svg.legend({{"Rationale", kRationaleColor}, {"Decision", kDecisionColor}});
  return svg.finish();
}

std::string structure_bars(const AnalysisReport& r) {
  Svg svg("Sentence categories over normalized position");
  const auto& h = r.structure;
  std::size_t max_stack = 0;
  for (std::size_t b = 0; b < h.n_bins; ++b) max_stack = std::max(max_stack, h.decision[b] + h.rationale[b] + h.none[b]);
  svg.axes("Normalized sentence position", "Sentences", static_cast<double>(std::max<std::size_t>(max_stack, 1)));
  if (max_stack == 0) {
    svg.no_data();
    return svg.finish();
  }
  const double slot = kPlotW / static_cast<double>(h.n_bins);
  const double y_max = static_cast<double>(max_stack);
  for (std::size_t b = 0; b < h.n_bins; ++b) {
    const double x = kLeft + slot * static_cast<double>(b);
    double base = 0;
    for (const auto& [count, color] : {std::pair{h.decision[b], kDecisionColor}, std::pair{h.rationale[b], kRationaleColor},
                                       std::pair{h.none[b], kNoneColor}}) {
      const double top = base + static_cast<double>(count);
      svg.rect(x + slot * 0.1, y_of(top, y_max), slot * 0.8, y_of(base, y_max) - y_of(top, y_max), color);
      base = top;
    }
    svg.text(x + slot / 2, kTop + kPlotH + 18,
             fmt::format("{:.1f}", (static_cast<double>(b) + 0.5) / static_cast<double>(h.n_bins)), "middle", 10);
  }
  svg.legend({{"Decision", kDecisionColor}, {"Rationale", kRationaleColor}, {"None", kNoneColor}});
  return svg.finish();
}

std::string word_bars(const WordFrequencyTable& t, std::string_view title, const char* color) {
  constexpr std::size_t kMaxWords = 20;
  Svg svg(title);
  const auto n = std::min(kMaxWords, t.entries.size());
  const double max_count = n ? static_cast<double>(t.entries.front().second) : 1.0;
  svg.axes("Word", "Occurrences", max_count);
  if (n == 0) {
    svg.no_data();
    return svg.finish();
  }
  const double slot = kPlotW / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [word, count] = t.entries[i];
    const double x = kLeft + slot * static_cast<double>(i);
    const double y = y_of(static_cast<double>(count), max_count);
    svg.rect(x + slot * 0.15, y, slot * 0.7, kTop + kPlotH - y, color);
    svg.rotated_text(x + slot / 2, kTop + kPlotH + 12, word);
  }
  return svg.finish();
}

}  // namespace

std::map<std::string, std::string> render_figures(const AnalysisReport& r) {
  return {
      {"factor_size_scatter.svg", factor_scatter(r)},
      {"factor_author_bars.svg", author_bars(r)},
      {"evolution_lines.svg", evolution_lines(r)},
      {"structure_bars.svg", structure_bars(r)},
      {"words_decision.svg", word_bars(r.decision_words, "Most frequent words in Decision-only sentences", kDecisionColor)},
      {"words_rationale.svg",
       word_bars(r.rationale_words, "Most frequent words in Rationale-only sentences", kRationaleColor)},
  };
}

std::vector<std::filesystem::path> export_figures(const AnalysisReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& [name, svg] : render_figures(r)) {
    const auto path = dir / name;
    write_file(path, svg);
    written.push_back(path);
  }
  return written;
}

}  // namespace comrat

#include "vrcp/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "vrcp/error.hpp"
#include "vrcp/format.hpp"
#include "vrcp/stats.hpp"

namespace vrcp {

using nlohmann::json;

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::csv;
  if (text == "json") return ReportFormat::json;
  throw ConfigError("unknown report format '" + std::string(text) + "' (expected csv or json)");
}

std::vector<AggregateRow> aggregate(std::span<const ReportRow> rows) {
  using Key = std::tuple<std::string, double, Norm>;
  std::map<Key, std::size_t> index;
  std::vector<Key> keys;
  std::vector<std::vector<const ReportRow*>> groups;
  for (const ReportRow& r : rows) {
    Key key{r.method, r.epsilon, r.norm};
    auto [it, inserted] = index.try_emplace(key, keys.size());
    if (inserted) {
      keys.push_back(key);
      groups.emplace_back();
    }
    groups[it->second].push_back(&r);
  }
  std::vector<AggregateRow> out;
  for (std::size_t g = 0; g < keys.size(); ++g) {
    std::vector<double> cov, size, ms;
    for (const ReportRow* r : groups[g]) {
      cov.push_back(r->coverage);
      size.push_back(r->avg_size);
      ms.push_back(r->wall_ms);
    }
    AggregateRow a;
    std::tie(a.method, a.epsilon, a.norm) = keys[g];
    a.n_splits = cov.size();
    a.coverage_mean = mean(cov);
    a.coverage_ci95 = ci95_half_width(cov);
    a.size_mean = mean(size);
    a.size_ci95 = ci95_half_width(size);
    a.wall_ms_mean = mean(ms);
    out.push_back(std::move(a));
  }
  return out;
}

namespace {

// JSON has no infinity; non-finite values are written as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::string emit_csv(const ExperimentReport& report) {
  std::string out(kReportCsvHeader);
  out += '\n';
  for (const ReportRow& r : report.rows) {
    out += r.method;
    out += ',' + format_double(r.epsilon);
    out += ',' + to_string(r.norm);
    out += ',' + std::to_string(r.split);
    out += ',' + format_double(r.coverage);
    out += ',' + format_double(r.avg_size);
    out += ',' + format_double(r.wall_ms);
    out += '\n';
  }
  return out;
}

std::string emit_json(const ExperimentReport& report) {
  json j;
  j["task"] = to_string(report.task);
  j["alpha"] = report.alpha;
  j["norm"] = to_string(report.norm);
  j["num_classes"] = report.num_classes;
  j["n_splits"] = report.n_splits;
  j["provenance"] = report.provenance;
  j["empty_interval_policy"] = kEmptyIntervalPolicy;
  json rows = json::array();
  for (const ReportRow& r : report.rows)
    rows.push_back({{"method", r.method}, {"epsilon", r.epsilon}, {"norm", to_string(r.norm)}, {"split", r.split},
                    {"coverage", number(r.coverage)}, {"avg_size", number(r.avg_size)},
                    {"wall_ms", number(r.wall_ms)}});
  j["rows"] = rows;
  json agg = json::array();
  for (const AggregateRow& a : aggregate(report.rows))
    agg.push_back({{"method", a.method},
                   {"epsilon", a.epsilon},
                   {"norm", to_string(a.norm)},
                   {"n_splits", a.n_splits},
                   {"coverage", {{"mean", number(a.coverage_mean)}, {"ci95", number(a.coverage_ci95)}}},
                   {"avg_size", {{"mean", number(a.size_mean)}, {"ci95", number(a.size_ci95)}}},
                   {"wall_ms_mean", number(a.wall_ms_mean)}});
  j["aggregate"] = agg;
  json cont = json::array();
  for (const ContainmentSummary& c : report.containment)
    cont.push_back({{"method", c.method}, {"epsilon", c.epsilon}, {"checked", c.checked},
                    {"violations", c.violations}, {"examples", c.examples}});
  j["containment"] = cont;
  if (!report.model_accuracy.empty())
    j["model_accuracy"] = {{"mean", mean(report.model_accuracy)},
                           {"ci95", number(ci95_half_width(report.model_accuracy))}};
  return j.dump(2) + "\n";
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Calls fn(line_number, fields) for every non-empty data line after checking
// the header.
template <typename Fn>
void for_each_record(std::string_view text, std::string_view header, Fn&& fn) {
  std::size_t line_no = 0;
  bool seen_header = false;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header)
        throw DataError(line_no, "expected header '" + std::string(header) + "', got '" + std::string(line) + "'");
      seen_header = true;
      continue;
    }
    fn(line_no, split_fields(line));
  }
  if (!seen_header) throw DataError(0, "missing header");
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError(line, "line " + std::to_string(line) + ": bad number '" + std::string(s) + "'");
  return v;
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError(line, "line " + std::to_string(line) + ": bad count '" + std::string(s) + "'");
  return v;
}

void expect_fields(const std::vector<std::string_view>& f, std::size_t n, std::size_t line) {
  if (f.size() != n)
    throw DataError(line, "line " + std::to_string(line) + ": expected " + std::to_string(n) + " fields, got " +
                              std::to_string(f.size()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
  if (!out) throw Error("cannot write " + path.string());
}

constexpr std::string_view kSizeCountsHeader = "method,epsilon,split,size,count";

}  // namespace

std::string emit_report(const ExperimentReport& report, ReportFormat format) {
  return format == ReportFormat::csv ? emit_csv(report) : emit_json(report);
}

std::vector<ReportRow> parse_report_csv(std::string_view text) {
  std::vector<ReportRow> rows;
  for_each_record(text, kReportCsvHeader, [&](std::size_t line, const std::vector<std::string_view>& f) {
    expect_fields(f, 7, line);
    ReportRow r;
    r.method = std::string(f[0]);
    r.epsilon = parse_double(f[1], line);
    try {
      r.norm = parse_norm(f[2]);
    } catch (const ConfigError&) {
      throw DataError(line, "line " + std::to_string(line) + ": bad norm '" + std::string(f[2]) + "'");
    }
    r.split = parse_count(f[3], line);
    r.coverage = parse_double(f[4], line);
    r.avg_size = parse_double(f[5], line);
    r.wall_ms = parse_double(f[6], line);
    rows.push_back(std::move(r));
  });
  return rows;
}

std::size_t SizeHistogram::total() const noexcept {
  std::size_t t = 0;
  for (std::size_t c : counts) t += c;
  return t;
}

std::vector<SizeHistogram> size_histogram(std::span<const SizeCounts> counts) {
  std::map<std::pair<std::string, double>, std::size_t> index;
  std::vector<SizeHistogram> out;
  for (const SizeCounts& c : counts) {
    auto [it, inserted] = index.try_emplace({c.method, c.epsilon}, out.size());
    if (inserted) out.push_back({c.method, c.epsilon, {}});
    std::vector<std::size_t>& acc = out[it->second].counts;
    if (acc.size() < c.counts.size()) acc.resize(c.counts.size(), 0);
    for (std::size_t s = 0; s < c.counts.size(); ++s) acc[s] += c.counts[s];
  }
  return out;
}

std::vector<SizeHistogram> size_histogram(const ExperimentReport& report) {
  if (report.task != Task::classification)
    throw ConfigError("set-size histograms are defined for classification reports only");
  return size_histogram(std::span<const SizeCounts>(report.size_counts));
}

std::string emit_size_counts_csv(std::span<const SizeCounts> counts) {
  std::string out(kSizeCountsHeader);
  out += '\n';
  for (const SizeCounts& c : counts)
    for (std::size_t s = 0; s < c.counts.size(); ++s)
      out += c.method + ',' + format_double(c.epsilon) + ',' + std::to_string(c.split) + ',' + std::to_string(s) +
             ',' + std::to_string(c.counts[s]) + '\n';
  return out;
}

std::vector<SizeCounts> parse_size_counts_csv(std::string_view text) {
  std::vector<SizeCounts> out;
  for_each_record(text, kSizeCountsHeader, [&](std::size_t line, const std::vector<std::string_view>& f) {
    expect_fields(f, 5, line);
    const std::string method(f[0]);
    const double eps = parse_double(f[1], line);
    const std::size_t split = parse_count(f[2], line);
    const std::size_t size = parse_count(f[3], line);
    const std::size_t count = parse_count(f[4], line);
    if (out.empty() || out.back().method != method || out.back().epsilon != eps || out.back().split != split)
      out.push_back({method, eps, split, {}});
    std::vector<std::size_t>& counts = out.back().counts;
    if (counts.size() <= size) counts.resize(size + 1, 0);
    counts[size] += count;
  });
  return out;
}

std::string emit_histogram_csv(std::span<const SizeHistogram> histograms) {
  std::string out = "method,epsilon,size,count,fraction\n";
  for (const SizeHistogram& h : histograms) {
    const double total = static_cast<double>(h.total());
    for (std::size_t s = 0; s < h.counts.size(); ++s)
      out += h.method + ',' + format_double(h.epsilon) + ',' + std::to_string(s) + ',' + std::to_string(h.counts[s]) +
             ',' + format_double(total > 0.0 ? static_cast<double>(h.counts[s]) / total : 0.0) + '\n';
  }
  return out;
}

std::string emit_trace_csv(std::span<const TracePoint> trace) {
  std::string out = "method,epsilon,split,point,score,bound,region,covered,size\n";
  for (const TracePoint& t : trace)
    out += t.method + ',' + format_double(t.epsilon) + ',' + std::to_string(t.split) + ',' + std::to_string(t.point) +
           ',' + format_double(t.score) + ',' + format_double(t.bound) + ",\"" + t.region + "\"," +
           (t.covered ? "1" : "0") + ',' + format_double(t.size) + '\n';
  return out;
}

std::vector<ReportRow> reaggregate_trace(std::span<const TracePoint> trace) {
  using Key = std::tuple<std::string, double, std::size_t>;
  std::map<Key, std::size_t> index;
  std::vector<ReportRow> rows;
  std::vector<std::size_t> n;
  for (const TracePoint& t : trace) {
    auto [it, inserted] = index.try_emplace({t.method, t.epsilon, t.split}, rows.size());
    if (inserted) {
      ReportRow r;
      r.method = t.method;
      r.epsilon = t.epsilon;
      r.split = t.split;
      rows.push_back(r);
      n.push_back(0);
    }
    ReportRow& r = rows[it->second];
    r.coverage += t.covered ? 1.0 : 0.0;
    r.avg_size += t.size;
    ++n[it->second];
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rows[i].coverage /= static_cast<double>(n[i]);
    rows[i].avg_size /= static_cast<double>(n[i]);
  }
  return rows;
}

std::vector<std::filesystem::path> write_report_files(const ExperimentReport& report,
                                                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto put = [&](const char* name, const std::string& bytes) {
    write_file(dir / name, bytes);
    written.push_back(dir / name);
  };
  put(kReportCsvName, emit_report(report, ReportFormat::csv));
  put(kReportJsonName, emit_report(report, ReportFormat::json));
  if (report.task == Task::classification) put(kSizeCountsName, emit_size_counts_csv(report.size_counts));
  if (!report.trace.empty()) put(kTraceName, emit_trace_csv(report.trace));
  return written;
}

std::vector<SizeHistogram> histogram_from_report_file(const std::filesystem::path& report_csv) {
  if (!std::filesystem::exists(report_csv)) throw ConfigError("report not found: " + report_csv.string());
  parse_report_csv(read_file(report_csv));
  const std::filesystem::path sizes = report_csv.parent_path() / kSizeCountsName;
  if (!std::filesystem::exists(sizes))
    throw ConfigError("no " + std::string(kSizeCountsName) + " next to " + report_csv.string() +
                      "; histograms exist only for classification runs");
  const std::vector<SizeCounts> counts = parse_size_counts_csv(read_file(sizes));
  return size_histogram(std::span<const SizeCounts>(counts));
}

}  // namespace vrcp

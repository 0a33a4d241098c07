#include "csac/app/metrics_csv.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "csac/errors.hpp"

namespace csac::app {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> flatten(const runtime::MetricsRow& r) {
  std::vector<double> v{static_cast<double>(r.step), r.mean_return};
  v.insert(v.end(), r.lat_ms.begin(), r.lat_ms.end());
  v.insert(v.end(), r.p95_ms.begin(), r.p95_ms.end());
  v.insert(v.end(), {r.alpha, r.q_loss, r.pi_loss, r.tps, r.wall_s});
  return v;
}

double parse_field(const std::string& s) {
  if (s.empty()) return kNaN;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw FormatError("metrics: bad number '" + s + "'");
  return v;
}

}  // namespace

std::vector<std::string> metrics_header(std::size_t slices) {
  std::vector<std::string> h{"step", "return"};
  for (std::size_t l = 0; l < slices; ++l) h.push_back("lat_ms_" + std::string(1, static_cast<char>('A' + l)));
  for (std::size_t l = 0; l < slices; ++l) h.push_back("p95_" + std::string(1, static_cast<char>('A' + l)));
  for (const char* c : {"alpha", "q_loss", "pi_loss", "tps", "wall_s"}) h.emplace_back(c);
  return h;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> csv_split(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

std::string format_metric(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

MetricsCsvWriter::MetricsCsvWriter(const std::filesystem::path& path, std::size_t slices)
    : path_(path), slices_(slices), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  const auto header = metrics_header(slices);
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << csv_escape(header[i]);
  out_ << "\r\n" << std::flush;
  if (!out_) throw IoError("write failed on " + path.string());
}

void MetricsCsvWriter::write(const runtime::MetricsRow& row) {
  if (row.lat_ms.size() != slices_ || row.p95_ms.size() != slices_)
    throw DimensionError("metrics row slice count does not match the header");
  const auto v = flatten(row);
  out_ << row.step;
  for (std::size_t i = 1; i < v.size(); ++i) out_ << ',' << format_metric(v[i]);
  out_ << "\r\n" << std::flush;
  if (!out_) throw IoError("write failed on " + path_.string());
}

std::vector<runtime::MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("metrics: missing header");
  const auto header = csv_split(line);
  const std::size_t fixed = 7;
  if (header.size() < fixed || (header.size() - fixed) % 2 != 0) throw FormatError("metrics: bad header");
  const std::size_t slices = (header.size() - fixed) / 2;
  if (header != metrics_header(slices)) throw FormatError("metrics: unexpected header");
  std::vector<runtime::MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = csv_split(line);
    if (f.size() != header.size()) throw FormatError("metrics: row has the wrong number of fields");
    runtime::MetricsRow r;
    r.step = static_cast<std::uint64_t>(parse_field(f[0]));
    r.mean_return = parse_field(f[1]);
    for (std::size_t l = 0; l < slices; ++l) {
      r.lat_ms.push_back(parse_field(f[2 + l]));
      r.p95_ms.push_back(parse_field(f[2 + slices + l]));
    }
    const std::size_t k = 2 + 2 * slices;
    r.alpha = parse_field(f[k]);
    r.q_loss = parse_field(f[k + 1]);
    r.pi_loss = parse_field(f[k + 2]);
    r.tps = parse_field(f[k + 3]);
    r.wall_s = parse_field(f[k + 4]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_smoothed_dat(const std::filesystem::path& path, const std::vector<runtime::MetricsRow>& rows,
                        std::size_t slices, std::size_t window) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << '#';
  for (const auto& h : metrics_header(slices)) out << ' ' << h;
  out << '\n';
  std::vector<std::vector<double>> flat;
  for (const auto& r : rows) flat.push_back(flatten(r));
  for (std::size_t i = 0; i < flat.size(); ++i) {
    out << rows[i].step;
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    for (std::size_t c = 1; c < flat[i].size(); ++c) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t j = lo; j <= i; ++j) {
        if (!std::isnan(flat[j][c])) {
          sum += flat[j][c];
          ++n;
        }
      }
      out << ' ' << (n ? format_metric(sum / static_cast<double>(n)) : std::string("NaN"));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed on " + path.string());
}

double window_return(const std::vector<runtime::MetricsRow>& rows, std::uint64_t from, std::uint64_t to) {
  double sum = 0.0;
  std::uint64_t steps = 0, prev = 0;
  for (const auto& r : rows) {
    const std::uint64_t len = r.step - prev;
    if (prev >= from && r.step <= to) {
      sum += r.mean_return * static_cast<double>(len);
      steps += len;
    }
    prev = r.step;
  }
  return steps ? sum / static_cast<double>(steps) : kNaN;
}

}  // namespace csac::app

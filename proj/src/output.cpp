#include "cosmichist/output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace cosmichist {

std::string format_sci(double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10e", value);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty())
    throw std::invalid_argument("CsvTable: empty header");
}

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != header_.size())
    throw std::invalid_argument("CsvTable: row width does not match header");
  rows_.push_back(row);
}

std::string CsvTable::render() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i)
      out += ',';
    out += header_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i)
        out += ',';
      out += format_sci(row[i]);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
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

// 1, 2 or 5 times a power of ten giving roughly `target` intervals.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", std::fabs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

} // namespace

std::string LinePlot::render_svg(int width, int height) const {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("LinePlot: need at least two points of equal length");

  const double left = 90, right = 30, top = 50, bottom = 60;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  const auto [xmin_it, xmax_it] = std::minmax_element(xs.begin(), xs.end());
  double x0 = *xmin_it, x1 = *xmax_it;
  if (x1 == x0)
    x1 = x0 + 1.0;

  // y range: decades for a log axis, padded nice ticks otherwise.
  double y0, y1;
  std::vector<double> yticks;
  if (log_y) {
    double ymax = 0.0;
    for (double y : ys)
      ymax = std::max(ymax, y);
    if (!(ymax > 0.0))
      ymax = 1.0;
    double ymin = ymax;
    for (double y : ys)
      if (y > 0.0)
        ymin = std::min(ymin, y);
    const double top_dec = std::ceil(std::log10(ymax));
    const double bottom_dec = std::max(std::floor(std::log10(ymin)), top_dec - 6.0);
    y0 = bottom_dec;
    y1 = top_dec > bottom_dec ? top_dec : bottom_dec + 1.0;
    for (double d = y0; d <= y1 + 1e-9; d += 1.0)
      yticks.push_back(d);
  } else {
    const auto [a, b] = std::minmax_element(ys.begin(), ys.end());
    y0 = *a;
    y1 = *b;
    if (y1 == y0)
      y1 = y0 + 1.0;
    const double step = nice_step(y1 - y0, 5);
    y0 = std::floor(y0 / step) * step;
    y1 = std::ceil(y1 / step) * step;
    for (double v = y0; v <= y1 + 0.5 * step; v += step)
      yticks.push_back(v);
  }

  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double yv) { return top + ph - (yv - y0) / (y1 - y0) * ph; };
  auto ycoord = [&](double y) {
    if (!log_y)
      return y;
    return y > 0.0 ? std::max(std::log10(y), y0) : y0;
  };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width
    << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
    << "\" fill=\"white\"/>\n"
    << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(top / 2 + 6)
    << "\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">"
    << escape_xml(title) << "</text>\n";

  // Frame.
  s << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw)
    << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // x ticks.
  const double xstep = nice_step(x1 - x0, 8);
  for (double v = std::ceil(x0 / xstep) * xstep; v <= x1 + 1e-9 * xstep; v += xstep) {
    const double x = px(v);
    s << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(top + ph) << "\" x2=\"" << fixed(x)
      << "\" y2=\"" << fixed(top + ph + 5) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(top + ph + 20)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
      << tick_label(v) << "</text>\n";
  }
  // y ticks.
  for (double v : yticks) {
    const double y = py(v);
    const std::string label = log_y ? "1e" + tick_label(v) : tick_label(v);
    s << "<line x1=\"" << fixed(left - 5) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(left)
      << "\" y2=\"" << fixed(y) << "\" stroke=\"black\"/>\n"
      << "<text x=\"" << fixed(left - 8) << "\" y=\"" << fixed(y + 4)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" << label
      << "</text>\n";
  }

  // Axis labels.
  s << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(height - 15.0)
    << "\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
    << escape_xml(x_label) << "</text>\n";
  const double ly = top + ph / 2;
  s << "<text x=\"20\" y=\"" << fixed(ly) << "\" transform=\"rotate(-90 20 " << fixed(ly)
    << ")\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
    << escape_xml(y_label) << "</text>\n";

  s << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i)
      s << ' ';
    s << fixed(px(xs[i])) << ',' << fixed(py(ycoord(ys[i])));
  }
  s << "\"/>\n</svg>\n";
  return s.str();
}

// ---------------------------------------------------------------------------
// Digests

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw std::runtime_error("sha256 computation failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(path, "cannot read file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

// ---------------------------------------------------------------------------
// Output set and manifest

void OutputSet::add(std::string name, std::string content) {
  files_.emplace_back(std::move(name), std::move(content));
}

std::vector<std::filesystem::path> OutputSet::commit(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoError(dir, "cannot create output directory");

  std::vector<std::filesystem::path> written;
  auto rollback = [&] {
    for (const auto& p : written)
      std::filesystem::remove(p, ec);
  };
  for (const auto& [name, content] : files_) {
    const auto path = dir / name;
    const auto tmp = dir / (name + ".partial");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) {
        rollback();
        throw IoError(tmp, "cannot open for writing");
      }
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.close();
      if (!out) {
        std::filesystem::remove(tmp, ec);
        rollback();
        throw IoError(tmp, "write failed");
      }
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
      std::filesystem::remove(tmp, ec);
      rollback();
      throw IoError(path, "cannot move file into place");
    }
    written.push_back(path);
  }
  return written;
}

std::string ManifestRecord::render() const {
  std::string out = "# run manifest\n";
  out += "command = " + command + "\n";
  out += "version = " + version + "\n";
  for (const auto& [k, v] : config)
    out += "config." + k + " = " + v + "\n";
  for (const auto& [name, digest] : digests)
    out += "file." + name + " = " + digest + "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", wall_clock_seconds);
  out += std::string("wall_clock_seconds = ") + buf + "\n";
  return out;
}

std::vector<std::string> verify_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in)
    throw IoError(manifest, "cannot read manifest");
  std::vector<std::string> problems;
  std::size_t checked = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("file.", 0) != 0)
      continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      problems.push_back("malformed line: " + line);
      continue;
    }
    const std::string name = line.substr(5, eq - 5);
    const std::string digest = line.substr(eq + 3);
    const auto path = manifest.parent_path() / name;
    ++checked;
    if (digest.rfind("sha256:", 0) != 0) {
      problems.push_back(name + ": unsupported digest '" + digest + "'");
      continue;
    }
    if (!std::filesystem::exists(path)) {
      problems.push_back(name + ": missing");
      continue;
    }
    if (sha256_file(path) != digest.substr(7))
      problems.push_back(name + ": digest mismatch");
  }
  if (checked == 0)
    problems.push_back("manifest lists no files");
  return problems;
}

} // namespace cosmichist

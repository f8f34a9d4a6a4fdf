#include "rsr/draws_io.hpp"

#include <fstream>
#include <string>

#include "rsr/dataset_io.hpp"
#include "rsr/error.hpp"

namespace rsr {

namespace {

void write_block(std::ofstream& out, const Vector& v) {
  for (Index j = 0; j < v.size(); ++j) out << ',' << format_number(v[j]);
}

std::size_t count_prefix(const std::vector<std::string>& header, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& h : header)
    if (h.rfind(prefix, 0) == 0) ++n;
  return n;
}

} // namespace

void write_draws_csv(const std::filesystem::path& path, const std::vector<PosteriorDraw>& draws) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  const Index p = draws.empty() ? 0 : draws.front().delta.size();
  const Index m = draws.empty() ? 0 : draws.front().y_miss.size();
  out << "draw,sigma2,tau2,gamma";
  for (Index j = 1; j <= p; ++j) out << ",delta_" << j;
  for (Index j = 1; j <= p; ++j) out << ",beta_" << j;
  for (Index j = 1; j <= m; ++j) out << ",ymiss_" << j;
  out << '\n';
  for (std::size_t b = 0; b < draws.size(); ++b) {
    const PosteriorDraw& d = draws[b];
    if (d.delta.size() != p || d.beta.size() != p || d.y_miss.size() != m) {
      throw Error(Errc::ShapeMismatch, "draws have inconsistent lengths");
    }
    out << (b + 1) << ',' << format_number(d.theta.sigma2) << ',' << format_number(d.theta.tau2) << ',';
    if (d.theta.gamma) out << format_number(*d.theta.gamma);
    write_block(out, d.delta);
    write_block(out, d.beta);
    write_block(out, d.y_miss);
    out << '\n';
  }
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

std::vector<PosteriorDraw> read_draws_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::IoError, path.string() + " is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 4 || header[0] != "draw" || header[1] != "sigma2" || header[2] != "tau2" || header[3] != "gamma") {
    throw Error(Errc::IoError, "draw file header must start with draw,sigma2,tau2,gamma");
  }
  const auto p = static_cast<Index>(count_prefix(header, "delta_"));
  const auto m = static_cast<Index>(count_prefix(header, "ymiss_"));
  if (static_cast<Index>(header.size()) != 4 + 2 * p + m) throw Error(Errc::IoError, "unexpected draw file columns");

  std::vector<PosteriorDraw> out;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw Error(Errc::ShapeMismatch, "draw row has the wrong number of fields");
    PosteriorDraw d;
    d.theta.sigma2 = parse_number(cells[1]);
    d.theta.tau2 = parse_number(cells[2]);
    if (!cells[3].empty()) d.theta.gamma = parse_number(cells[3]);
    d.delta.resize(p);
    d.beta.resize(p);
    d.y_miss.resize(m);
    for (Index j = 0; j < p; ++j) d.delta[j] = parse_number(cells[static_cast<std::size_t>(4 + j)]);
    for (Index j = 0; j < p; ++j) d.beta[j] = parse_number(cells[static_cast<std::size_t>(4 + p + j)]);
    for (Index j = 0; j < m; ++j) d.y_miss[j] = parse_number(cells[static_cast<std::size_t>(4 + 2 * p + j)]);
    out.push_back(std::move(d));
  }
  return out;
}

void write_g_csv(const std::filesystem::path& path, const std::vector<PosteriorDraw>& draws) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write " + path.string());
  const Index n = draws.empty() ? 0 : draws.front().g.size();
  out << "draw";
  for (Index j = 1; j <= n; ++j) out << ",g_" << j;
  out << '\n';
  for (std::size_t b = 0; b < draws.size(); ++b) {
    if (draws[b].g.size() != n) throw Error(Errc::ShapeMismatch, "g draws have inconsistent lengths");
    out << (b + 1);
    write_block(out, draws[b].g);
    out << '\n';
  }
  if (!out) throw Error(Errc::IoError, "failed writing " + path.string());
}

Matrix read_g_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::IoError, path.string() + " is empty");
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "draw") throw Error(Errc::IoError, "g file header must start with draw");
  const auto n = static_cast<Index>(header.size() - 1);
  std::vector<Vector> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw Error(Errc::ShapeMismatch, "g row has the wrong number of fields");
    Vector g(n);
    for (Index j = 0; j < n; ++j) g[j] = parse_number(cells[static_cast<std::size_t>(j + 1)]);
    rows.push_back(std::move(g));
  }
  Matrix out(static_cast<Index>(rows.size()), n);
  for (std::size_t b = 0; b < rows.size(); ++b) out.row(static_cast<Index>(b)) = rows[b].transpose();
  return out;
}

} // namespace rsr

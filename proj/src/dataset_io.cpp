#include "rsr/dataset_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <numeric>

#include "rsr/error.hpp"

namespace rsr {

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_number(std::string_view field) {
  while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    throw Error(Errc::IoError, "cannot parse number '" + std::string(field) + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
    while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
    out.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

SpatialDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open dataset " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::IoError, "dataset " + path.string() + " is empty");
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "site" || header[1] != "y") {
    throw Error(Errc::IoError, "dataset header must start with site,y,x1");
  }
  const std::size_t p = header.size() - 2;
  for (std::size_t j = 0; j < p; ++j) {
    if (header[j + 2] != "x" + std::to_string(j + 1)) {
      throw Error(Errc::IoError, "expected column x" + std::to_string(j + 1) + ", found '" + header[j + 2] + "'");
    }
  }

  std::vector<double> obs_site, obs_y, miss_site;
  std::vector<std::vector<double>> obs_x, miss_x;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(Errc::ShapeMismatch, "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                           " fields, expected " + std::to_string(header.size()));
    }
    std::vector<double> x(p);
    for (std::size_t j = 0; j < p; ++j) x[j] = parse_number(cells[j + 2]);
    const double site = parse_number(cells[0]);
    if (cells[1].empty()) {
      miss_site.push_back(site);
      miss_x.push_back(std::move(x));
    } else {
      obs_site.push_back(site);
      obs_y.push_back(parse_number(cells[1]));
      obs_x.push_back(std::move(x));
    }
  }

  const auto to_matrix = [p](const std::vector<std::vector<double>>& rows) {
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(p));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < p; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    return m;
  };
  const auto to_vector = [](const std::vector<double>& v) {
    return Vector(Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size())));
  };
  return validate_dataset(to_vector(obs_y), to_matrix(obs_x), to_vector(obs_site), to_vector(miss_site),
                          to_matrix(miss_x));
}

void write_dataset_csv(const std::filesystem::path& path, const SpatialDataset& data) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoError, "cannot write dataset " + path.string());
  const Index p = data.p();
  out << "site,y";
  for (Index j = 0; j < p; ++j) out << ",x" << (j + 1);
  out << '\n';

  struct Row {
    double site;
    bool missing;
    Index index;
  };
  std::vector<Row> rows;
  for (Index i = 0; i < data.n_obs(); ++i) rows.push_back({data.obs_sites[i], false, i});
  for (Index i = 0; i < data.n_miss(); ++i) rows.push_back({data.miss_sites[i], true, i});
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.site < b.site; });

  for (const Row& r : rows) {
    out << format_number(r.site) << ',';
    if (!r.missing) out << format_number(data.y_obs[r.index]);
    const Matrix& x = r.missing ? data.x_miss : data.x_obs;
    for (Index j = 0; j < p; ++j) out << ',' << format_number(x(r.index, j));
    out << '\n';
  }
  if (!out) throw Error(Errc::IoError, "failed writing dataset " + path.string());
}

} // namespace rsr

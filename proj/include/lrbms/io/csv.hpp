#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrbms/config.hpp"
#include "lrbms/dg_space.hpp"
#include "lrbms/enrich.hpp"
#include "lrbms/errors.hpp"
#include "lrbms/estimate.hpp"
#include "lrbms/reduce.hpp"

namespace lrbms::io {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string hash_line(std::uint64_t config_hash) { return "# config_hash: " + hex64(config_hash) + "\n"; }

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Comment lines dropped; what reproducibility checks compare.
inline std::string csv_body(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line))
    if (line.empty() || line[0] != '#') out += line + "\n";
  return out;
}

inline std::string estimator_report_csv(const EstimatorReport& rep, std::uint64_t config_hash) {
  std::string s = hash_line(config_hash);
  s += "# alpha: " + num(rep.alpha_bar) + "\n";
  s += "# gamma: " + num(rep.gamma_bar) + "\n";
  s += "# alpha_hat: " + num(rep.alpha_hat) + "\n";
  s += "# eta: " + num(rep.eta) + "\n";
  s += "T_id,eta_nc,eta_r,eta_df,indicator\n";
  for (std::size_t T = 0; T < rep.nc.size(); ++T)
    s += std::to_string(T) + "," + num(rep.nc[T]) + "," + num(rep.r[T]) + "," + num(rep.df[T]) + "," +
         num(rep.indicators[T]) + "\n";
  return s;
}

inline std::string enrichment_log_csv(const std::vector<EnrichmentLog>& logs, std::uint64_t config_hash) {
  std::string s = hash_line(config_hash) + "param_index,step,eta,n_marked,total_basis_size\n";
  for (const auto& log : logs)
    for (const auto& st : log.steps)
      s += std::to_string(st.param_index) + "," + std::to_string(st.step) + "," + num(st.eta) + "," +
           std::to_string(st.marked.size()) + "," + std::to_string(st.total_basis_size) + "\n";
  return s;
}

/// Basis sizes laid out like the coarse grid, top row first.
inline std::string basis_size_matrix_csv(const TwoLevelGrid& grid, const std::vector<int>& sizes,
                                         std::uint64_t config_hash) {
  const GridDims d = grid.coarse_dims();
  std::string s = hash_line(config_hash) + "# coarse " + std::to_string(d.nx) + "x" + std::to_string(d.ny) +
                  ", first line is the top row\n";
  for (int i = 0; i < d.nx; ++i) s += (i ? ",x" : "x") + std::to_string(i);
  s += "\n";
  for (int j = d.ny - 1; j >= 0; --j) {
    for (int i = 0; i < d.nx; ++i) s += (i ? "," : "") + std::to_string(sizes[static_cast<std::size_t>(j * d.nx + i)]);
    s += "\n";
  }
  return s;
}

inline std::string greedy_log_csv(const GreedyResult& g, std::uint64_t config_hash) {
  std::string s = hash_line(config_hash) + "# termination: " + g.termination + "\n";
  s += "iteration,max_eta,argmax,total_basis_size\n";
  for (const auto& r : g.log)
    s += std::to_string(r.iteration) + "," + num(r.max_eta) + "," + std::to_string(r.argmax) + "," +
         std::to_string(r.total_basis_size) + "\n";
  return s;
}

inline std::string timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

/// One text matrix per subdomain (basis_<T>.txt, rows = local dofs) plus manifest.json.
inline void export_bases(const std::filesystem::path& dir, const DGSpace& space, const std::vector<LocalReducedBasis>& bases,
                         const Parameter& mu_bar) {
  std::filesystem::create_directories(dir);
  Json sizes = Json::array(), files = Json::array();
  for (const auto& b : bases) {
    std::string s = std::to_string(b.vectors.rows()) + " " + std::to_string(b.vectors.cols()) + "\n";
    char buf[32];
    for (Eigen::Index r = 0; r < b.vectors.rows(); ++r) {
      for (Eigen::Index c = 0; c < b.vectors.cols(); ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", b.vectors(r, c));
        s += (c ? " " : "") + std::string(buf);
      }
      s += "\n";
    }
    const std::string name = "basis_" + std::to_string(b.T) + ".txt";
    write_file(dir / name, s);
    sizes.push_back(b.size());
    files.push_back(name);
  }
  Json m = {{"grid_hash", hex64(space.grid().hash())},
            {"order", space.order()},
            {"mu_bar", mu_bar},
            {"sizes", sizes},
            {"files", files},
            {"created", timestamp()}};
  write_file(dir / "manifest.json", m.dump(2) + "\n");
}

inline std::vector<LocalReducedBasis> import_bases(const std::filesystem::path& manifest, const DGSpace& space,
                                                   Parameter* mu_bar = nullptr) {
  Json m;
  try {
    m = Json::parse(read_file(manifest));
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("basis manifest: ") + e.what(), 0);
  }
  if (m.at("grid_hash").get<std::string>() != hex64(space.grid().hash()))
    throw InvalidArgument("basis manifest was written for a different grid");
  if (m.at("order").get<int>() != space.order()) throw InvalidArgument("basis manifest has a different polynomial order");
  const auto& files = m.at("files");
  if (static_cast<int>(files.size()) != space.grid().num_coarse())
    throw InvalidArgument("basis manifest lists the wrong number of subdomains");
  if (mu_bar) *mu_bar = m.at("mu_bar").get<Parameter>();
  std::vector<LocalReducedBasis> out;
  for (std::size_t T = 0; T < files.size(); ++T) {
    std::istringstream in(read_file(manifest.parent_path() / files[T].get<std::string>()));
    Eigen::Index rows = 0, cols = 0;
    in >> rows >> cols;
    if (rows != space.coarse_size() || cols < 0) throw ParseError("basis file " + files[T].get<std::string>() + ": bad shape", 1);
    LocalReducedBasis b;
    b.T = static_cast<int>(T);
    b.vectors.resize(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c)
        if (!(in >> b.vectors(r, c)))
          throw ParseError("basis file " + files[T].get<std::string>() + ": truncated", static_cast<int>(r) + 2);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace lrbms::io

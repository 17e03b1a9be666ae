#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "markovsa/harness.hpp"

namespace markovsa {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    out.emplace_back();
  }
  return out;
}

double parse_number(const std::string& s, int line_no, const char* what) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw std::runtime_error("agents csv line " + std::to_string(line_no) +
                             ": non-numeric " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

AgentTable ingest_agents(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("agents csv: cannot open '" + path + "'");
  }

  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("agents csv line 1: missing header");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "label") {
    throw std::runtime_error(
        "agents csv line 1: header must start with 'label'");
  }
  const int d = static_cast<int>(header.size()) - 1;
  if (d < 1) {
    throw std::runtime_error("agents csv line 1: no feature columns");
  }
  for (int j = 1; j <= d; ++j) {
    if (header[static_cast<std::size_t>(j)] != "f" + std::to_string(j)) {
      throw std::runtime_error("agents csv line 1: expected column 'f" +
                               std::to_string(j) + "', got '" +
                               header[static_cast<std::size_t>(j)] + "'");
    }
  }

  std::vector<double> labels;
  std::vector<double> feats;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != d + 1) {
      throw std::runtime_error("agents csv line " + std::to_string(line_no) +
                               ": expected " + std::to_string(d + 1) +
                               " fields, got " +
                               std::to_string(fields.size()));
    }
    const double y = parse_number(fields[0], line_no, "label");
    if (y != 1.0 && y != -1.0) {
      throw std::runtime_error("agents csv line " + std::to_string(line_no) +
                               ": label must be +1 or -1, got '" + fields[0] +
                               "'");
    }
    labels.push_back(y);
    for (int j = 1; j <= d; ++j) {
      feats.push_back(parse_number(fields[static_cast<std::size_t>(j)],
                                   line_no, "feature"));
    }
  }
  if (labels.empty()) {
    throw std::runtime_error("agents csv: no agent rows");
  }

  AgentTable table;
  const auto M = static_cast<Eigen::Index>(labels.size());
  table.labels = Eigen::Map<Eigen::VectorXd>(labels.data(), M);
  table.features = Eigen::Map<RowMatrixXd>(feats.data(), M, d);
  return table;
}

void export_agents(const AgentTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("agents csv: cannot write '" + path + "'");
  }
  out << "label";
  for (Eigen::Index j = 0; j < table.features.cols(); ++j) {
    out << ",f" << (j + 1);
  }
  out << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < table.features.rows(); ++i) {
    out << (table.labels[i] > 0 ? "1" : "-1");
    for (Eigen::Index j = 0; j < table.features.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", table.features(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
}

}  // namespace markovsa

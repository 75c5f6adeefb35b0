#include "dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace longmed {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& s, int row, const std::string& col) {
  if (s.empty()) {
    throw ValidationError("row " + std::to_string(row) + ": missing cell in column " + col);
  }
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("row " + std::to_string(row) + ": cannot parse '" + s +
                          "' in column " + col);
  }
}

// Count of consecutive columns named <prefix>1..<prefix>K starting at `at`.
int run_length(const std::vector<std::string>& header, std::size_t at,
               const std::string& prefix) {
  int k = 0;
  while (at + k < header.size() &&
         header[at + k] == prefix + std::to_string(k + 1)) {
    ++k;
  }
  return k;
}

}  // namespace

std::vector<char> model_processes(Model model) {
  switch (model) {
    case Model::kUnivariate: return {'m'};
    case Model::kModel1: return {'m', 'y'};
    case Model::kModel2: return {'x', 'm', 'y'};
  }
  return {};
}

void validate(const Dataset& data) {
  if (data.rows.empty()) throw ValidationError("dataset has no rows");
  if (data.J < 2) throw ValidationError("dataset needs at least 2 occasions per process");
  const auto procs = model_processes(data.model);
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& r = data.rows[i];
    const int row = static_cast<int>(i) + 1;
    if (data.model == Model::kModel1 && !std::isfinite(r.x)) {
      throw ValidationError("row " + std::to_string(row) + ": non-finite covariate x");
    }
    for (char u : procs) {
      const Eigen::VectorXd* t = nullptr;
      const Eigen::VectorXd* v = nullptr;
      switch (u) {
        case 'x': t = &r.x_t; v = &r.x_v; break;
        case 'm': t = &r.m_t; v = &r.m_v; break;
        case 'y': t = &r.y_t; v = &r.y_v; break;
      }
      const std::string where = "row " + std::to_string(row) + ", process " + u;
      if (t->size() != data.J || v->size() != data.J) {
        throw ValidationError(where + ": expected " + std::to_string(data.J) +
                              " occasions, found " + std::to_string(t->size()) +
                              " times / " + std::to_string(v->size()) + " values");
      }
      if (!t->allFinite() || !v->allFinite()) {
        throw ValidationError(where + ": non-finite entry");
      }
      for (int j = 1; j < data.J; ++j) {
        if ((*t)[j] <= (*t)[j - 1]) {
          throw ValidationError(where + ": occasion times not strictly increasing (t" +
                                std::to_string(j + 1) + " <= t" + std::to_string(j) + ")");
        }
      }
    }
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty dataset file: " + path);
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "id") {
    throw ValidationError("dataset header must start with 'id'");
  }

  Dataset data;
  std::size_t pos = 1;
  bool scalar_x = pos < header.size() && header[pos] == "x";
  if (scalar_x) {
    data.model = Model::kModel1;
    ++pos;
  } else if (pos < header.size() && header[pos] == "x_t1") {
    data.model = Model::kModel2;
  } else {
    throw ValidationError(
        "dataset header must carry either a scalar 'x' column or 'x_t*' columns "
        "after 'id'");
  }

  const auto procs = model_processes(data.model);
  int J = -1;
  struct Cols { std::size_t t, v; };
  std::vector<Cols> cols;
  for (char u : procs) {
    const std::string tp = std::string(1, u) + "_t";
    const std::string vp = std::string(1, u) + "_v";
    int jt = run_length(header, pos, tp);
    if (jt == 0) {
      throw ValidationError(std::string("dataset header: expected columns ") + tp +
                            "1.. at position " + std::to_string(pos + 1));
    }
    Cols c;
    c.t = pos;
    pos += jt;
    int jv = run_length(header, pos, vp);
    if (jv != jt) {
      throw ValidationError(std::string("dataset header: process ") + u + " has " +
                            std::to_string(jt) + " time columns but " +
                            std::to_string(jv) + " value columns");
    }
    c.v = pos;
    pos += jv;
    if (J < 0) J = jt;
    if (jt != J) {
      throw ValidationError(std::string("dataset header: process ") + u +
                            " occasion count differs from earlier processes");
    }
    cols.push_back(c);
  }
  if (pos != header.size()) {
    throw ValidationError("dataset header: unexpected trailing column '" +
                          header[pos] + "'");
  }
  data.J = J;

  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ValidationError("row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
    }
    IndividualRecord rec;
    rec.id = cells[0];
    if (scalar_x) rec.x = parse_cell(cells[1], row, "x");
    for (std::size_t k = 0; k < procs.size(); ++k) {
      Eigen::VectorXd t(J), v(J);
      for (int j = 0; j < J; ++j) {
        t[j] = parse_cell(cells[cols[k].t + j], row, header[cols[k].t + j]);
        v[j] = parse_cell(cells[cols[k].v + j], row, header[cols[k].v + j]);
      }
      switch (procs[k]) {
        case 'x': rec.x_t = t; rec.x_v = v; break;
        case 'm': rec.m_t = t; rec.m_v = v; break;
        case 'y': rec.y_t = t; rec.y_v = v; break;
      }
    }
    data.rows.push_back(std::move(rec));
  }
  validate(data);
  return data;
}

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file: " + path);
  const auto procs = model_processes(data.model);
  out << "id";
  if (data.model == Model::kModel1) out << ",x";
  for (char u : procs) {
    for (int j = 1; j <= data.J; ++j) out << ',' << u << "_t" << j;
    for (int j = 1; j <= data.J; ++j) out << ',' << u << "_v" << j;
  }
  out << '\n';
  for (const auto& r : data.rows) {
    out << r.id;
    if (data.model == Model::kModel1) out << ',' << format_full(r.x);
    for (char u : procs) {
      const Eigen::VectorXd* t = nullptr;
      const Eigen::VectorXd* v = nullptr;
      switch (u) {
        case 'x': t = &r.x_t; v = &r.x_v; break;
        case 'm': t = &r.m_t; v = &r.m_v; break;
        case 'y': t = &r.y_t; v = &r.y_v; break;
      }
      for (int j = 0; j < data.J; ++j) out << ',' << format_full((*t)[j]);
      for (int j = 0; j < data.J; ++j) out << ',' << format_full((*v)[j]);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

Dataset extract_process(const Dataset& data, char process) {
  Dataset out;
  out.model = Model::kUnivariate;
  out.J = data.J;
  out.rows.reserve(data.rows.size());
  for (const auto& r : data.rows) {
    IndividualRecord u;
    u.id = r.id;
    switch (process) {
      case 'x':
        if (data.model != Model::kModel2) {
          throw ValidationError("process x is longitudinal only in Model 2");
        }
        u.m_t = r.x_t; u.m_v = r.x_v; break;
      case 'm': u.m_t = r.m_t; u.m_v = r.m_v; break;
      case 'y': u.m_t = r.y_t; u.m_v = r.y_v; break;
      default: throw ValidationError(std::string("unknown process: ") + process);
    }
    out.rows.push_back(std::move(u));
  }
  return out;
}

TimeRange process_time_range(const Dataset& data, char process) {
  TimeRange r{std::numeric_limits<double>::infinity(),
              -std::numeric_limits<double>::infinity()};
  for (const auto& row : data.rows) {
    const Eigen::VectorXd* t = nullptr;
    switch (process) {
      case 'x': t = &row.x_t; break;
      case 'm': t = &row.m_t; break;
      case 'y': t = &row.y_t; break;
      default: throw ValidationError(std::string("unknown process: ") + process);
    }
    if (t->size() == 0) throw ValidationError(std::string("process ") + process + " has no occasions");
    r.lo = std::min(r.lo, (*t)[0]);
    r.hi = std::max(r.hi, (*t)[t->size() - 1]);
  }
  return r;
}

}  // namespace longmed

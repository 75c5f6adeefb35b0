#include "reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "effects.hpp"
#include "param_space.hpp"

namespace longmed {

namespace {

// Minimal streaming JSON writer.  Exists so every double goes through
// format_full (17 significant digits); generic serializers pick their own
// shortest representation.  Non-finite doubles become null.
class JsonWriter {
 public:
  void begin_obj() { open('{'); }
  void end_obj() { close('}', '{'); }
  void begin_arr() { open('['); }
  void end_arr() { close(']', '['); }

  void key(const std::string& k) {
    prefix();
    quote(k);
    os_ << ": ";
    after_key_ = true;
  }
  void str(const std::string& v) { prefix(); quote(v); }
  void num(double v) {
    prefix();
    if (std::isfinite(v)) {
      os_ << format_full(v);
    } else {
      os_ << "null";
    }
  }
  void num(int v) { prefix(); os_ << v; }
  void num(std::uint64_t v) { prefix(); os_ << v; }
  void boolean(bool v) { prefix(); os_ << (v ? "true" : "false"); }
  void null() { prefix(); os_ << "null"; }

  std::string take() { return os_.str() + "\n"; }

 private:
  void prefix() {
    if (after_key_) {
      after_key_ = false;
      return;
    }
    if (stack_.empty()) return;
    if (!stack_.back().first) os_ << ',';
    stack_.back().first = false;
    os_ << '\n' << std::string(2 * stack_.size(), ' ');
  }
  void open(char c) {
    prefix();
    os_ << c;
    stack_.push_back({true, c});
  }
  void close(char c, char opener) {
    if (stack_.empty() || stack_.back().opener != opener) {
      throw std::logic_error("report writer: mismatched container close");
    }
    const bool was_empty = stack_.back().first;
    stack_.pop_back();
    if (!was_empty) os_ << '\n' << std::string(2 * stack_.size(), ' ');
    os_ << c;
  }
  void quote(const std::string& s) {
    os_ << '"';
    for (char c : s) {
      switch (c) {
        case '"': os_ << "\\\""; break;
        case '\\': os_ << "\\\\"; break;
        case '\n': os_ << "\\n"; break;
        case '\t': os_ << "\\t"; break;
        case '\r': os_ << "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            os_ << buf;
          } else {
            os_ << c;
          }
      }
    }
    os_ << '"';
  }

  struct Frame {
    bool first = true;  // nothing emitted in this container yet
    char opener = '{';
  };
  std::ostringstream os_;
  std::vector<Frame> stack_;
  bool after_key_ = false;
};

void interval_fields(JsonWriter& w, double est, double se, double lo, double hi,
                     bool se_ok) {
  w.key("est");
  w.num(est);
  w.key("se");
  if (se_ok) {
    w.num(se);
  } else {
    w.null();
  }
  w.key("ci_lo");
  if (se_ok) {
    w.num(lo);
  } else {
    w.null();
  }
  w.key("ci_hi");
  if (se_ok) {
    w.num(hi);
  } else {
    w.null();
  }
}

void write_fit_block(JsonWriter& w, const FitResult& res) {
  w.key("fit");
  w.begin_obj();
  w.key("converged");
  w.boolean(res.converged);
  w.key("status");
  w.str(res.message);
  w.key("loglik");
  w.num(res.loglik);
  w.key("starts_used");
  w.num(res.starts_used);
  w.key("grad_norm");
  w.num(res.grad_norm);
  w.key("se_available");
  w.boolean(res.cov_ok);
  w.end_obj();
}

void write_param_table(JsonWriter& w, const FitResult& res) {
  w.key("parameters");
  w.begin_arr();
  for (const auto& p : res.params) {
    w.begin_obj();
    w.key("name");
    w.str(p.name);
    interval_fields(w, p.est, p.se, p.lo, p.hi, p.se_ok);
    w.end_obj();
  }
  w.end_arr();
}

void write_effect_tables(JsonWriter& w, const FitResult& res) {
  w.key("effects");
  w.begin_arr();
  for (const auto& e : res.effects) {
    w.begin_obj();
    w.key("label");
    w.str(e.label);
    w.key("kind");
    w.str(effect_kind_name(e.kind));
    interval_fields(w, e.est, e.se, e.lo, e.hi, e.se_ok);
    w.end_obj();
  }
  w.end_arr();
  w.key("derived_means");
  w.begin_arr();
  for (const auto& d : res.derived_means) {
    w.begin_obj();
    w.key("name");
    w.str(d.name);
    interval_fields(w, d.est, d.se, d.lo, d.hi, d.se_ok);
    w.end_obj();
  }
  w.end_arr();
}

void write_gf_moments(JsonWriter& w, const FitResult& res) {
  w.key("gf_moments");
  w.begin_arr();
  if (res.natural.size() == param_dim(res.model) &&
      res.model != Model::kUnivariate) {
    for (const auto& pm : marginal_gf_moments(res.model, res.natural)) {
      w.begin_obj();
      w.key("process");
      w.str(std::string(1, pm.process));
      w.key("mean");
      w.begin_arr();
      for (int i = 0; i < 3; ++i) w.num(pm.mean(i));
      w.end_arr();
      w.key("cov");
      w.begin_arr();
      for (int r = 0; r < 3; ++r) {
        w.begin_arr();
        for (int c = 0; c < 3; ++c) w.num(pm.cov(r, c));
        w.end_arr();
      }
      w.end_arr();
      w.end_obj();
    }
  }
  w.end_arr();
}

void write_condition(JsonWriter& w, const ConditionSpec& spec, bool mc_fields) {
  w.begin_obj();
  w.key("label");
  w.str(spec.make_label());
  w.key("model");
  w.num(spec.model == Model::kModel1 ? 1 : 2);
  w.key("n");
  w.num(spec.n);
  w.key("J");
  w.num(spec.J);
  w.key("knots");
  w.begin_obj();
  if (spec.model == Model::kModel2) {
    w.key("x");
    w.num(spec.knot_x);
  }
  w.key("m");
  w.num(spec.knot_m);
  w.key("y");
  w.num(spec.knot_y);
  w.end_obj();
  w.key("theta");
  w.num(spec.theta);
  w.key("residual_corr");
  w.num(spec.residual_corr);
  w.key("scenario");
  w.str(scenario_name(spec.scenario));
  w.key("shape");
  w.str(shape_name(spec.shape));
  w.key("time_jitter");
  w.num(spec.time_jitter);
  if (mc_fields) {
    w.key("reps");
    w.num(spec.reps);
    w.key("max_starts");
    w.num(spec.max_starts);
    w.key("seed");
    w.num(spec.seed);
  }
  w.end_obj();
}

std::string csv_num(double v) { return std::isfinite(v) ? format_full(v) : ""; }

}  // namespace

std::string fit_report_json(const FitResult& res, const std::string& data_path,
                            std::uint64_t seed) {
  JsonWriter w;
  w.begin_obj();
  w.key("command");
  w.str("fit");
  w.key("model");
  w.num(res.model == Model::kModel1 ? 1 : 2);
  w.key("univariate");
  w.boolean(false);
  w.key("data");
  w.str(data_path);
  w.key("seed");
  w.num(seed);
  w.key("n");
  w.num(res.n);
  w.key("J");
  w.num(res.J);
  write_fit_block(w, res);
  write_param_table(w, res);
  write_effect_tables(w, res);
  write_gf_moments(w, res);
  w.end_obj();
  return w.take();
}

std::string univariate_report_json(Model model, const std::vector<char>& processes,
                                   const std::vector<FitResult>& fits,
                                   const std::string& data_path,
                                   std::uint64_t seed) {
  JsonWriter w;
  w.begin_obj();
  w.key("command");
  w.str("fit");
  w.key("model");
  w.num(model == Model::kModel1 ? 1 : 2);
  w.key("univariate");
  w.boolean(true);
  w.key("data");
  w.str(data_path);
  w.key("seed");
  w.num(seed);
  if (!fits.empty()) {
    w.key("n");
    w.num(fits.front().n);
    w.key("J");
    w.num(fits.front().J);
  }
  w.key("processes");
  w.begin_arr();
  for (std::size_t i = 0; i < fits.size(); ++i) {
    w.begin_obj();
    w.key("process");
    w.str(std::string(1, processes[i]));
    write_fit_block(w, fits[i]);
    write_param_table(w, fits[i]);
    w.end_obj();
  }
  w.end_arr();
  w.end_obj();
  return w.take();
}

namespace {

void fit_csv_rows(std::ostringstream& os, const FitResult& res,
                  const std::string& process) {
  auto row = [&](const std::string& block, const std::string& name,
                 const std::string& kind, double est, double se, double lo,
                 double hi, bool se_ok) {
    os << block << ',' << process << ',' << name << ',' << kind << ','
       << format_full(est) << ',';
    if (se_ok) {
      os << csv_num(se) << ',' << csv_num(lo) << ',' << csv_num(hi);
    } else {
      os << ",,";
    }
    os << '\n';
  };
  for (const auto& p : res.params) {
    row("parameter", p.name, "", p.est, p.se, p.lo, p.hi, p.se_ok);
  }
  for (const auto& e : res.effects) {
    row("effect", e.label, effect_kind_name(e.kind), e.est, e.se, e.lo, e.hi,
        e.se_ok);
  }
  for (const auto& d : res.derived_means) {
    row("derived", d.name, "", d.est, d.se, d.lo, d.hi, d.se_ok);
  }
}

}  // namespace

std::string fit_report_csv(const FitResult& res) {
  std::ostringstream os;
  os << "block,process,name,kind,est,se,ci_lo,ci_hi\n";
  fit_csv_rows(os, res, "");
  return os.str();
}

std::string univariate_report_csv(const std::vector<char>& processes,
                                  const std::vector<FitResult>& fits) {
  std::ostringstream os;
  os << "block,process,name,kind,est,se,ci_lo,ci_hi\n";
  for (std::size_t i = 0; i < fits.size(); ++i) {
    fit_csv_rows(os, fits[i], std::string(1, processes[i]));
  }
  return os.str();
}

std::string truth_report_json(const ConditionSpec& spec, const TruthBundle& truth,
                              std::uint64_t seed) {
  JsonWriter w;
  w.begin_obj();
  w.key("command");
  w.str("simulate");
  w.key("model");
  w.num(truth.model == Model::kModel1 ? 1 : 2);
  w.key("seed");
  w.num(seed);
  w.key("condition");
  write_condition(w, spec, false);
  const auto names = param_names(truth.model);
  w.key("parameters");
  w.begin_arr();
  for (std::size_t i = 0; i < names.size(); ++i) {
    w.begin_obj();
    w.key("name");
    w.str(names[i]);
    w.key("value");
    w.num(truth.packed(static_cast<Eigen::Index>(i)));
    w.end_obj();
  }
  w.end_arr();
  w.key("effects");
  w.begin_arr();
  for (const auto& def : effect_catalog(truth.model)) {
    w.begin_obj();
    w.key("label");
    w.str(def.label);
    w.key("kind");
    w.str(effect_kind_name(def.kind));
    w.key("value");
    w.num(effect_value(def, truth.packed));
    w.end_obj();
  }
  w.end_arr();
  const DerivedMeans dm = derived_gf_means(truth.model, truth.packed);
  w.key("derived_means");
  w.begin_arr();
  for (std::size_t i = 0; i < dm.names.size(); ++i) {
    w.begin_obj();
    w.key("name");
    w.str(dm.names[i]);
    w.key("value");
    w.num(dm.value(static_cast<Eigen::Index>(i)));
    w.end_obj();
  }
  w.end_arr();
  w.end_obj();
  return w.take();
}

namespace {

struct SummaryKey {
  std::string name;
  std::string group;
  bool absolute = false;
  bool operator<(const SummaryKey& o) const {
    if (name != o.name) return name < o.name;
    if (group != o.group) return group < o.group;
    return absolute < o.absolute;
  }
};

struct SummaryAcc {
  int order = 0;  // first-appearance rank, keeps output order stable
  std::vector<double> bias, emp_se, rmse, coverage;
};

void write_med_range(JsonWriter& w, const char* key, std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  const double median =
      (k % 2 == 1) ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
  w.key(key);
  w.begin_obj();
  w.key("median");
  w.num(median);
  w.key("min");
  w.num(v.front());
  w.key("max");
  w.num(v.back());
  w.end_obj();
}

}  // namespace

std::string mc_report_json(const std::vector<ConditionResult>& results,
                           std::uint64_t top_seed) {
  JsonWriter w;
  w.begin_obj();
  w.key("command");
  w.str("mc");
  w.key("seed");
  w.num(top_seed);
  w.key("conditions");
  w.begin_arr();
  std::map<SummaryKey, SummaryAcc> summary;
  int next_order = 0;
  for (const auto& cond : results) {
    w.begin_obj();
    w.key("label");
    w.str(cond.label);
    w.key("spec");
    write_condition(w, cond.spec, true);
    w.key("reps_requested");
    w.num(cond.spec.reps);
    w.key("converged");
    w.num(cond.converged);
    w.key("attempts");
    w.num(cond.attempts);
    w.key("convergence_rate");
    w.num(cond.convergence_rate);
    w.key("partial");
    w.boolean(cond.partial);
    w.key("metrics");
    w.begin_arr();
    for (const auto& row : cond.rows) {
      w.begin_obj();
      w.key("name");
      w.str(row.name);
      w.key("group");
      w.str(row.group);
      w.key("truth");
      w.num(row.truth);
      w.key("absolute");
      w.boolean(row.absolute);
      w.key("bias");
      w.num(row.bias);
      w.key("emp_se");
      w.num(row.emp_se);
      w.key("rmse");
      w.num(row.rmse);
      w.key("coverage");
      w.num(row.coverage);
      w.key("mc_se_bias");
      w.num(row.mc_se_bias);
      w.key("reps");
      w.num(row.reps);
      w.end_obj();
      SummaryAcc& acc = summary
                            .emplace(SummaryKey{row.name, row.group, row.absolute},
                                     SummaryAcc{next_order, {}, {}, {}, {}})
                            .first->second;
      if (acc.bias.empty()) ++next_order;
      acc.bias.push_back(row.bias);
      acc.emp_se.push_back(row.emp_se);
      acc.rmse.push_back(row.rmse);
      acc.coverage.push_back(row.coverage);
    }
    w.end_arr();
    w.end_obj();
  }
  w.end_arr();

  // Per quantity: median and range of each metric across conditions.
  std::vector<const std::pair<const SummaryKey, SummaryAcc>*> ordered;
  ordered.reserve(summary.size());
  for (const auto& kv : summary) ordered.push_back(&kv);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->second.order < b->second.order; });
  w.key("summary");
  w.begin_arr();
  for (const auto* kv : ordered) {
    w.begin_obj();
    w.key("name");
    w.str(kv->first.name);
    w.key("group");
    w.str(kv->first.group);
    w.key("absolute");
    w.boolean(kv->first.absolute);
    w.key("conditions");
    w.num(static_cast<int>(kv->second.bias.size()));
    write_med_range(w, "bias", kv->second.bias);
    write_med_range(w, "emp_se", kv->second.emp_se);
    write_med_range(w, "rmse", kv->second.rmse);
    write_med_range(w, "coverage", kv->second.coverage);
    w.end_obj();
  }
  w.end_arr();
  w.end_obj();
  return w.take();
}

std::string mc_report_csv(const std::vector<ConditionResult>& results) {
  std::ostringstream os;
  os << "condition,name,group,truth,absolute,bias,emp_se,rmse,coverage,"
        "mc_se_bias,reps,attempts,convergence_rate\n";
  for (const auto& cond : results) {
    for (const auto& row : cond.rows) {
      os << cond.label << ',' << row.name << ',' << row.group << ','
         << format_full(row.truth) << ',' << (row.absolute ? 1 : 0) << ','
         << format_full(row.bias) << ',' << format_full(row.emp_se) << ','
         << format_full(row.rmse) << ',' << format_full(row.coverage) << ','
         << format_full(row.mc_se_bias) << ',' << row.reps << ','
         << cond.attempts << ',' << format_full(cond.convergence_rate) << '\n';
    }
  }
  return os.str();
}

std::string csv_path_for(const std::string& out_path) {
  const std::string suffix = ".json";
  if (out_path.size() > suffix.size() &&
      out_path.compare(out_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
    return out_path.substr(0, out_path.size() - suffix.size()) + ".csv";
  }
  return out_path + ".csv";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open output file: " + path);
  os << text;
  os.flush();
  if (!os) throw IoError("failed writing output file: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open file: " + path);
  std::ostringstream buf;
  buf << is.rdbuf();
  if (is.bad()) throw IoError("failed reading file: " + path);
  return buf.str();
}

}  // namespace longmed

// Exercises the public C interface against the shared library only; no
// internal headers are included on purpose.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <json.hpp>
#include <longmed/longmed.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/longmed_capi_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
  void write(const std::string& text) const {
    std::ofstream out(path);
    out << text;
  }
};

std::string simulate_dataset(const std::string& tag, int n, uint64_t seed) {
  TempFile cfg("sim_" + tag + ".json");  // config can go once the data exist
  const std::string data = "/tmp/longmed_capi_data_" + tag + ".csv";
  cfg.write(std::string(R"({
    "model": 1, "seed": )") + std::to_string(seed) + R"(,
    "simulate": {
      "condition": {"n": )" + std::to_string(n) + R"(, "J": 6,
                    "knots": {"m": 2.5, "y": 3.0}},
      "data_out": ")" + data + R"("
    }
  })");
  REQUIRE(lm_cmd_simulate(cfg.path.c_str(), nullptr) == LM_OK);
  return data;
}

}  // namespace

TEST_CASE("dataset handle: read, inspect, free") {
  const std::string data = simulate_dataset("ds", 40, 9001);
  lm_dataset* d = nullptr;
  REQUIRE(lm_dataset_read_csv(data.c_str(), &d) == LM_OK);
  REQUIRE(d != nullptr);
  CHECK(lm_dataset_rows(d) == 40);
  CHECK(lm_dataset_occasions(d) == 6);
  CHECK(lm_dataset_model(d) == LM_MODEL_1);
  lm_dataset_free(d);
  std::remove(data.c_str());
  std::remove("/tmp/longmed_capi_data_ds.truth.json");
}

TEST_CASE("missing file reports LM_E_IO with a message") {
  lm_dataset* d = reinterpret_cast<lm_dataset*>(0x1);
  CHECK(lm_dataset_read_csv("/tmp/longmed_capi_no_such.csv", &d) == LM_E_IO);
  CHECK(d == nullptr);
  CHECK(std::strlen(lm_last_error()) > 0);
}

TEST_CASE("fit: accessors, report JSON, cleanup") {
  const std::string data = simulate_dataset("fit", 90, 9002);
  lm_dataset* d = nullptr;
  REQUIRE(lm_dataset_read_csv(data.c_str(), &d) == LM_OK);

  lm_fit_options opt;
  lm_fit_options_init(&opt);
  CHECK(opt.max_starts == 10);
  CHECK(opt.grad_tol == 1e-5);
  CHECK(opt.max_iter == 500);
  opt.seed = 7;

  lm_fit_result* r = nullptr;
  REQUIRE(lm_fit(d, LM_MODEL_1, &opt, &r) == LM_OK);
  REQUIRE(r != nullptr);
  CHECK(lm_fit_converged(r) == 1);
  CHECK(std::isfinite(lm_fit_loglik(r)));
  REQUIRE(lm_fit_param_count(r) == 37);
  CHECK(std::string(lm_fit_param_name(r, 0)) == "mu_x");
  CHECK(std::string(lm_fit_param_name(r, 2)) == "gamma_m");
  for (int i = 0; i < lm_fit_param_count(r); ++i) {
    CHECK(std::isfinite(lm_fit_param_est(r, i)));
  }
  REQUIRE(lm_fit_effect_count(r) == 21);
  CHECK(std::string(lm_fit_effect_label(r, 0)) == "x->m1");
  CHECK(std::string(lm_fit_effect_kind(r, 0)) == "direct");
  CHECK(std::string(lm_fit_effect_kind(r, 20)) == "total");
  CHECK(std::isfinite(lm_fit_effect_est(r, 5)));

  char* json = lm_fit_report_json(r, data.c_str(), 7);
  REQUIRE(json != nullptr);
  const auto doc = nlohmann::json::parse(json);
  CHECK(doc.at("model") == 1);
  CHECK(doc.at("data") == data);
  CHECK(doc.at("fit").at("converged") == true);
  CHECK(doc.at("parameters").size() == 37);
  CHECK(doc.at("effects").size() == 21);
  int directs = 0;
  for (const auto& e : doc.at("effects")) directs += e.at("kind") == "direct";
  CHECK(directs == 12);
  CHECK(doc.at("derived_means").size() == 6);
  CHECK(doc.at("gf_moments").size() == 2);
  lm_string_free(json);

  // out-of-range accessor arguments degrade, never crash
  CHECK(lm_fit_param_name(r, 99) == nullptr);
  CHECK(std::isnan(lm_fit_param_est(r, -1)));
  CHECK(lm_fit_effect_label(nullptr, 0) == nullptr);

  lm_fit_result_free(r);
  lm_dataset_free(d);
  std::remove(data.c_str());
  std::remove("/tmp/longmed_capi_data_fit.truth.json");
}

TEST_CASE("under-identified fit returns LM_E_NO_CONVERGE plus diagnostics") {
  const std::string data = simulate_dataset("tiny", 12, 9003);
  lm_dataset* d = nullptr;
  REQUIRE(lm_dataset_read_csv(data.c_str(), &d) == LM_OK);
  lm_fit_result* r = nullptr;
  CHECK(lm_fit(d, LM_MODEL_1, nullptr, &r) == LM_E_NO_CONVERGE);
  REQUIRE(r != nullptr);  // carries the failure context
  CHECK(lm_fit_converged(r) == 0);
  CHECK(std::strlen(lm_last_error()) > 0);
  CHECK(std::isnan(lm_fit_param_se(r, 0)));
  lm_fit_result_free(r);
  lm_dataset_free(d);
  std::remove(data.c_str());
  std::remove("/tmp/longmed_capi_data_tiny.truth.json");
}

TEST_CASE("argument validation across the boundary") {
  CHECK(lm_fit(nullptr, LM_MODEL_1, nullptr, nullptr) == LM_E_VALIDATION);
  const std::string data = simulate_dataset("args", 40, 9004);
  lm_dataset* d = nullptr;
  REQUIRE(lm_dataset_read_csv(data.c_str(), &d) == LM_OK);
  lm_fit_result* r = nullptr;
  CHECK(lm_fit(d, 9, nullptr, &r) == LM_E_VALIDATION);
  CHECK(r == nullptr);
  CHECK(lm_fit(d, LM_MODEL_2, nullptr, &r) == LM_E_VALIDATION);  // data mismatch
  lm_dataset_free(d);
  std::remove(data.c_str());
  std::remove("/tmp/longmed_capi_data_args.truth.json");

  // frees and error queries tolerate nulls
  lm_dataset_free(nullptr);
  lm_fit_result_free(nullptr);
  lm_string_free(nullptr);
  CHECK(lm_last_error() != nullptr);
}

TEST_CASE("command wrappers propagate config problems as status codes") {
  TempFile cfg("badcfg.json");
  cfg.write(R"({"model": 1, "seed": 1, "unknown_key": true})");
  CHECK(lm_cmd_fit(cfg.path.c_str(), nullptr) == LM_E_VALIDATION);
  CHECK(lm_cmd_mc(cfg.path.c_str(), nullptr) == LM_E_VALIDATION);
  CHECK(std::strlen(lm_last_error()) > 0);
  CHECK(lm_cmd_simulate("/tmp/longmed_capi_no_config.json", nullptr) == LM_E_IO);

  lm_cmd_overrides ov;
  lm_cmd_overrides_init(&ov);
  CHECK(ov.has_model == 0);
  CHECK(ov.out == nullptr);
  CHECK(ov.univariate == 0);
}

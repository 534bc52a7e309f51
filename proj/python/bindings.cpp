// JSON crosses the boundary as text; the Python package decodes it.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "staterecall/answer_parse.hpp"
#include "staterecall/error.hpp"
#include "staterecall/metrics.hpp"
#include "staterecall/prompt.hpp"
#include "staterecall/runner.hpp"
#include "staterecall/selftest.hpp"

namespace py = pybind11;
namespace sr = staterecall;

namespace {

sr::Catalog load(const std::optional<std::string>& path) {
  return sr::load_catalog(path ? std::filesystem::path(*path) : sr::default_catalog_path(),
                          sr::kDefaultTargetColumn, sr::kDefaultRetrieveColumn);
}

std::string generate(const std::string& family, std::size_t m, std::size_t n, std::size_t index,
                     sr::Seed seed, const std::optional<std::string>& catalog, const std::string& swap_pattern) {
  const auto fam = sr::parse_family(family);
  sr::GenerationConfig cfg;
  cfg.swap_pattern = sr::parse_swap_pattern(swap_pattern);
  if (fam == sr::Family::AstroRecall) {
    const auto cat = load(catalog);
    return sr::canonical_string(sr::generate_task(fam, &cat, m, n, index, seed, cfg));
  }
  return sr::canonical_string(sr::generate_task(fam, nullptr, m, n, index, seed, cfg));
}

py::dict render(const std::string& task_json) {
  const auto prompt = sr::render(sr::task_from_json(nlohmann::json::parse(task_json)));
  py::dict out;
  out["text"] = prompt.text;
  out["option_letters"] = prompt.option_letters;
  return out;
}

py::dict parse_answer(const std::string& raw, const std::vector<std::string>& letters,
                      const std::vector<std::string>& texts, bool accept_option_text) {
  sr::ParserConfig cfg;
  cfg.accept_option_text = accept_option_text;
  const auto outcome = sr::parse_answer(raw, letters, texts, cfg);
  py::dict out;
  out["parsed"] = outcome.parsed();
  out["letter"] = outcome.parsed() ? py::object(py::str(outcome.letter)) : py::none();
  out["reason"] = outcome.reason ? py::object(py::str(std::string(sr::to_string(*outcome.reason)))) : py::none();
  return out;
}

py::tuple frac(const sr::Rational& r) { return py::make_tuple(r.num, r.den); }

py::dict bin_metrics(std::uint64_t total, std::uint64_t parsed, std::uint64_t correct) {
  if (total == 0) throw py::value_error("total must be positive");
  if (parsed > total || correct > parsed) throw py::value_error("need correct <= parsed <= total");
  const sr::BinMetrics b{0, 0, total, parsed, correct};
  py::dict out;
  out["accuracy"] = frac(b.accuracy());
  out["parsed_rate"] = frac(b.parsed_rate());
  out["parsed_weighted"] = frac(b.parsed_weighted());
  return out;
}

py::list selftest(bool quick, const std::optional<std::string>& fault) {
  sr::SelftestOptions opts;
  opts.quick = quick;
  opts.inject_fault = fault;
  py::list out;
  for (const auto& r : sr::run_selftest(opts)) {
    py::dict d;
    d["name"] = r.name;
    d["passed"] = r.passed;
    d["detail"] = r.detail;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<sr::Error>(m, "StateRecallError", PyExc_ValueError);

  m.def("generate", &generate, py::arg("family"), py::arg("m"), py::arg("n"), py::arg("index") = 0,
        py::arg("seed") = 0, py::arg("catalog") = py::none(), py::arg("swap_pattern") = "anchored");
  m.def("render", &render, py::arg("task_json"));
  m.def("parse_answer", &parse_answer, py::arg("raw"), py::arg("letters"), py::arg("texts") = std::vector<std::string>{},
        py::arg("accept_option_text") = true);
  m.def("bin_metrics", &bin_metrics, py::arg("total"), py::arg("parsed"), py::arg("correct"));
  m.def("derive_instance_seed",
        [](sr::Seed base, const std::string& family, std::uint64_t mm, std::uint64_t n, std::uint64_t index) {
          return sr::derive_instance_seed(base, sr::parse_family(family), mm, n, index);
        });
  m.def("selftest", &selftest, py::arg("quick") = true, py::arg("inject_fault") = py::none());
  m.def("default_catalog_path", [] { return sr::default_catalog_path().string(); });
}

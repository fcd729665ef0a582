#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "asnfuzz/errors.hpp"
#include "asnfuzz/pdu_fuzzer.hpp"
#include "asnfuzz/schema_mutator.hpp"
#include "asnfuzz/schema_text.hpp"
#include "asnfuzz/uper.hpp"
#include "asnfuzz/value_json.hpp"

namespace py = pybind11;
using namespace asnfuzz;

namespace {

BitBuffer bits_from_hex(const std::string& hex, std::optional<std::size_t> bit_length) {
  BitBuffer b = BitBuffer::from_bytes(from_hex(hex));
  if (bit_length) {
    if (*bit_length > b.bytes.size() * 8) throw Error("bit length exceeds hex payload");
    b.bit_length = *bit_length;
  }
  return b;
}

py::dict outcome_dict(const FuzzOutcome& o) {
  py::dict d;
  d["pdu_star"] = to_hex(o.pdu_star.bytes);
  d["bits"] = o.pdu_star.bit_length;
  d["strategy_applied"] = o.strategy_applied;
  d["message_type"] = o.message_type;
  d["fuzzer_time_cost_us"] = o.fuzzer_time_cost_us;
  return d;
}

std::vector<PduStrategy> strategies_of(const std::string& csv) {
  return csv.empty() ? std::vector<PduStrategy>{} : parse_pdu_strategy_list(csv);
}

}  // namespace

PYBIND11_MODULE(_asnfuzz, m) {
  m.doc() = "Schema-driven ASN.1 UPER fuzzer";
  py::register_exception<Error>(m, "AsnfuzzError");

  py::class_<Schema>(m, "Schema")
      .def(py::init([](const std::string& text) { return parse(text); }), py::arg("text"))
      .def_property_readonly("name", [](const Schema& s) { return s.name; })
      .def_property_readonly("types",
                             [](const Schema& s) {
                               std::vector<std::string> out;
                               for (const auto& a : s.assignments) out.push_back(a.name);
                               return out;
                             })
      .def_property_readonly("is_mutated", &Schema::is_mutated)
      .def("render", [](const Schema& s) { return render(s); })
      .def("dump", [](const Schema& s) { return dump(s); })
      .def("validate",
           [](const Schema& s) {
             std::vector<std::string> out;
             for (const auto& e : validate_schema(s)) {
               out.push_back(std::string(error_kind_name(e.kind)) + " " + e.path.str() + ": " +
                             e.message);
             }
             return out;
           })
      .def("__eq__", [](const Schema& a, const Schema& b) { return a == b; });

  m.def(
      "extract",
      [](const std::string& document) {
        const auto ex = extract(document);
        py::dict report;
        report["blocks_found"] = ex.report.blocks_found;
        report["ignored_tags"] = ex.report.ignored_tags;
        report["bytes_extracted"] = ex.report.bytes_extracted;
        return py::make_tuple(ex.text, report);
      },
      py::arg("document"));

  m.def(
      "encode",
      [](const Schema& s, const std::string& type, const std::string& json) {
        const Value v = value_from_json(s, s.at(type), nlohmann::ordered_json::parse(json));
        const auto b = encode(s, type, v);
        return py::make_tuple(to_hex(b.bytes), b.bit_length);
      },
      py::arg("schema"), py::arg("type"), py::arg("json"));

  m.def(
      "decode",
      [](const Schema& s, const std::string& type, const std::string& hex,
         std::optional<std::size_t> bit_length) {
        const Value v = decode_exact(s, type, bits_from_hex(hex, bit_length));
        return value_to_json(s, s.at(type), v).dump();
      },
      py::arg("schema"), py::arg("type"), py::arg("hex"), py::arg("bit_length") = py::none());

  m.def(
      "plan_from_seed",
      [](const Schema& s, const std::string& strategies, std::uint64_t seed) {
        return format_plan(plan_from_seed(s, parse_strategy_list(strategies), seed));
      },
      py::arg("schema"), py::arg("strategies"), py::arg("seed"));

  m.def(
      "apply_plan",
      [](const Schema& s, const std::string& plan) { return apply(s, parse_plan(plan)); },
      py::arg("schema"), py::arg("plan"));

  m.def(
      "mutate_pdu",
      [](const Schema& s, const std::string& root, const std::string& hex,
         std::optional<std::size_t> bit_length, std::uint64_t seed, const std::string& strategies,
         std::optional<std::string> target_field, bool christmas_tree,
         std::vector<std::string> blob_fields) {
        FuzzConfig cfg;
        cfg.seed = seed;
        cfg.strategies = strategies_of(strategies);
        cfg.target_field = std::move(target_field);
        cfg.christmas_tree = christmas_tree;
        cfg.blob_fields = std::move(blob_fields);
        return outcome_dict(mutate_pdu(s, root, bits_from_hex(hex, bit_length), cfg));
      },
      py::arg("schema"), py::arg("root"), py::arg("hex"), py::arg("bit_length") = py::none(),
      py::arg("seed") = 0, py::arg("strategies") = "", py::arg("target_field") = py::none(),
      py::arg("christmas_tree") = false, py::arg("blob_fields") = std::vector<std::string>{});

  m.def(
      "generate_pdu",
      [](const Schema& original, const Schema& mutated, const std::vector<std::string>& pool,
         std::uint64_t seed, bool christmas_tree, std::optional<std::string> envelope) {
        FuzzConfig cfg;
        cfg.mode = FuzzMode::Generation;
        cfg.seed = seed;
        cfg.christmas_tree = christmas_tree;
        cfg.envelope = std::move(envelope);
        return outcome_dict(generate_pdu(original, mutated, pool, cfg));
      },
      py::arg("original"), py::arg("mutated"), py::arg("pool"), py::arg("seed") = 0,
      py::arg("christmas_tree") = false, py::arg("envelope") = py::none());

  m.def(
      "perturb",
      [](const Schema& s, const std::string& expected, const std::vector<std::string>& pool,
         std::uint64_t seed, std::optional<std::string> envelope) {
        return outcome_dict(perturb(s, expected, pool, seed, envelope));
      },
      py::arg("schema"), py::arg("expected"), py::arg("pool"), py::arg("seed") = 0,
      py::arg("envelope") = py::none());
}

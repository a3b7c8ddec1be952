#include <map>

#include "hdoe/bench.hpp"
#include "hdoe/error.hpp"
#include "hdoe/space_document.hpp"

namespace hdoe {

namespace {

const std::map<std::string, std::string>& documents() {
    static const std::map<std::string, std::string> docs = {
        {"basic", R"({"dimensions": [
  {"id": "x1", "kind": "continuous", "lb": 0, "ub": 1},
  {"id": "x2", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true},
  {"id": "x3", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true}
]})"},
        {"simple", R"({"dimensions": [
  {"id": "x1", "kind": "continuous", "lb": 0, "ub": 1},
  {"id": "x2", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true},
  {"id": "x3", "kind": "composite", "nullable": true, "children": [
    {"id": "x4", "kind": "continuous", "lb": 0, "ub": 1},
    {"id": "x5", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true}
  ]}
]})"},
        {"modest", R"({"dimensions": [
  {"id": "x1", "kind": "continuous", "lb": 0, "ub": 1},
  {"id": "x2", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true},
  {"id": "x3", "kind": "composite", "nullable": true, "children": [
    {"id": "x4", "kind": "continuous", "lb": 0, "ub": 1},
    {"id": "x5", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true}
  ]},
  {"id": "x6", "kind": "composite", "nullable": true, "children": [
    {"id": "x7", "kind": "continuous", "lb": 0, "ub": 1},
    {"id": "x8", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true}
  ]}
]})"},
        {"complex", R"({"dimensions": [
  {"id": "x1", "kind": "continuous", "lb": 0, "ub": 1},
  {"id": "x2", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true},
  {"id": "x3", "kind": "composite", "nullable": true, "children": [
    {"id": "x4", "kind": "continuous", "lb": 0, "ub": 1},
    {"id": "x5", "kind": "composite", "nullable": true, "children": [
      {"id": "x6", "kind": "continuous", "lb": 0, "ub": 1},
      {"id": "x7", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true}
    ]}
  ]},
  {"id": "x8", "kind": "composite", "nullable": true, "children": [
    {"id": "x9", "kind": "continuous", "lb": 0, "ub": 1},
    {"id": "x10", "kind": "continuous", "lb": 0, "ub": 1, "nullable": true}
  ]}
]})"},
    };
    return docs;
}

}  // namespace

bool is_builtin_space(const std::string& name) { return documents().contains(name); }

std::vector<std::string> builtin_space_names() { return {"basic", "simple", "modest", "complex"}; }

const std::string& builtin_space_document(const std::string& name) {
    auto it = documents().find(name);
    if (it == documents().end()) throw Error("unknown built-in space '" + name + "'");
    return it->second;
}

FlatSpace builtin_space(const std::string& name) {
    return flatten(parse_space_spec(builtin_space_document(name)));
}

std::vector<std::size_t> default_sizes(const std::string& name) {
    if (name == "basic") return {12, 24, 36};
    if (name == "simple") return {20, 40, 60};
    if (name == "modest" || name == "complex") return {32, 64, 96};
    throw Error("unknown built-in space '" + name + "'");
}

}  // namespace hdoe

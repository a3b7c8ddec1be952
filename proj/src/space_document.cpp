#include "hdoe/space_document.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "hdoe/bench.hpp"
#include "hdoe/error.hpp"

namespace hdoe {

namespace {

using nlohmann::json;

const std::set<std::string> kFields = {"id",       "kind",         "lb",       "ub",      "value_set",
                                       "nullable", "null_portion", "children", "branches"};

DimKind parse_kind(const std::string& id, const std::string& text) {
    if (text == "continuous") return DimKind::continuous;
    if (text == "discrete-numeric") return DimKind::discrete;
    if (text == "categorical") return DimKind::categorical;
    if (text == "composite") return DimKind::composite;
    if (text == "variant") return DimKind::variant;
    throw SpaceError(id, "unknown kind '" + text + "'");
}

DimensionSpec parse_dimension(const json& j);

std::vector<DimensionSpec> parse_list(const std::string& id, const json& j, const char* field) {
    if (!j.is_array()) throw SpaceError(id, std::string(field) + " must be an array");
    std::vector<DimensionSpec> out;
    for (const auto& item : j) out.push_back(parse_dimension(item));
    return out;
}

DimensionSpec parse_dimension(const json& j) {
    if (!j.is_object()) throw SpaceError("", "dimension entry must be an object");
    std::string id;
    if (j.contains("id")) {
        if (!j["id"].is_string()) throw SpaceError("", "id must be a string");
        id = j["id"].get<std::string>();
    }
    if (id.empty()) throw SpaceError("", "dimension entry is missing an id");
    for (const auto& [key, value] : j.items())
        if (!kFields.contains(key)) throw SpaceError(id, "unknown field '" + key + "'");
    if (!j.contains("kind") || !j["kind"].is_string())
        throw SpaceError(id, "missing or non-string kind");

    DimensionSpec spec;
    spec.id = id;
    spec.kind = parse_kind(id, j["kind"].get<std::string>());

    auto allowed = [&](const char* field, bool ok) {
        if (j.contains(field) && !ok)
            throw SpaceError(id, std::string("field '") + field + "' not allowed for kind " +
                                     std::string(to_string(spec.kind)));
    };
    allowed("lb", spec.kind == DimKind::continuous);
    allowed("ub", spec.kind == DimKind::continuous);
    allowed("value_set", spec.kind == DimKind::discrete || spec.kind == DimKind::categorical);
    allowed("children", spec.kind == DimKind::composite);
    allowed("branches", spec.kind == DimKind::variant);

    auto number = [&](const char* field) {
        if (!j[field].is_number()) throw SpaceError(id, std::string(field) + " must be a number");
        return j[field].get<double>();
    };
    if (spec.kind == DimKind::continuous) {
        if (!j.contains("lb") || !j.contains("ub")) throw SpaceError(id, "continuous needs lb and ub");
        spec.lb = number("lb");
        spec.ub = number("ub");
        if (!(spec.lb < spec.ub)) throw SpaceError(id, "lb must be < ub");
    }
    if (spec.kind == DimKind::discrete || spec.kind == DimKind::categorical) {
        if (!j.contains("value_set") || !j["value_set"].is_array())
            throw SpaceError(id, "value_set must be an array");
        for (const auto& v : j["value_set"]) {
            if (spec.kind == DimKind::discrete) {
                if (!v.is_number()) throw SpaceError(id, "discrete value_set must hold numbers");
                spec.values.push_back(v.get<double>());
            } else {
                if (!v.is_string()) throw SpaceError(id, "categorical value_set must hold strings");
                spec.labels.push_back(v.get<std::string>());
            }
        }
        if (spec.values.size() + spec.labels.size() < 2)
            throw SpaceError(id, "value_set needs >= 2 values");
    }
    if (j.contains("nullable")) {
        if (!j["nullable"].is_boolean()) throw SpaceError(id, "nullable must be a boolean");
        spec.nullable = j["nullable"].get<bool>();
    }
    if (j.contains("null_portion") && !j["null_portion"].is_null())
        spec.null_portion = number("null_portion");
    if (spec.kind == DimKind::composite) {
        if (!j.contains("children")) throw SpaceError(id, "composite needs children");
        spec.children = parse_list(id, j["children"], "children");
    }
    if (spec.kind == DimKind::variant) {
        if (!j.contains("branches") || !j["branches"].is_array())
            throw SpaceError(id, "variant needs a branches array");
        for (const auto& branch : j["branches"]) spec.branches.push_back(parse_list(id, branch, "branch"));
    }
    return spec;
}

json dump_dimension(const DimensionSpec& spec) {
    json j;
    j["id"] = spec.id;
    j["kind"] = std::string(to_string(spec.kind));
    if (spec.kind == DimKind::continuous) {
        j["lb"] = spec.lb;
        j["ub"] = spec.ub;
    }
    if (spec.kind == DimKind::discrete) j["value_set"] = spec.values;
    if (spec.kind == DimKind::categorical) j["value_set"] = spec.labels;
    if (spec.nullable) j["nullable"] = true;
    if (spec.null_portion) j["null_portion"] = *spec.null_portion;
    if (spec.kind == DimKind::composite) {
        j["children"] = json::array();
        for (const auto& c : spec.children) j["children"].push_back(dump_dimension(c));
    }
    if (spec.kind == DimKind::variant) {
        j["branches"] = json::array();
        for (const auto& branch : spec.branches) {
            json b = json::array();
            for (const auto& c : branch) b.push_back(dump_dimension(c));
            j["branches"].push_back(std::move(b));
        }
    }
    return j;
}

}  // namespace

InputSpace parse_space_spec(std::string_view document) {
    json root;
    try {
        root = json::parse(document);
    } catch (const json::parse_error& e) {
        throw SpaceError("", std::string("malformed space document: ") + e.what());
    }
    if (!root.is_object()) throw SpaceError("", "space document must be an object");
    for (const auto& [key, value] : root.items())
        if (key != "dimensions") throw SpaceError("", "unknown top-level field '" + key + "'");
    if (!root.contains("dimensions") || !root["dimensions"].is_array())
        throw SpaceError("", "space document needs a dimensions array");

    InputSpace space;
    for (const auto& item : root["dimensions"]) space.dimensions.push_back(parse_dimension(item));
    validate(space);
    return space;
}

std::string to_space_document(const InputSpace& space) {
    json root;
    root["dimensions"] = json::array();
    for (const auto& d : space.dimensions) root["dimensions"].push_back(dump_dimension(d));
    return root.dump(2);
}

std::shared_ptr<const FlatSpace> load_space(const std::string& name_or_path) {
    if (is_builtin_space(name_or_path))
        return std::make_shared<const FlatSpace>(builtin_space(name_or_path));
    std::ifstream in(name_or_path);
    if (!in) throw Error("cannot open space document '" + name_or_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::make_shared<const FlatSpace>(flatten(parse_space_spec(buf.str())));
}

}  // namespace hdoe

#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "hdoe/space.hpp"

namespace hdoe {

/// Parses a space document:
///
///   {"dimensions": [{"id": "x1", "kind": "continuous", "lb": 0, "ub": 1}, ...]}
///
/// Recognised fields per entry are id, kind, lb, ub, value_set, nullable,
/// null_portion, children and branches; anything else is rejected. Kinds are
/// "continuous", "discrete-numeric", "categorical", "composite" and "variant".
InputSpace parse_space_spec(std::string_view document);

/// Inverse of parse_space_spec; fields at their defaults are omitted.
std::string to_space_document(const InputSpace& space);

/// Reads a space from `name_or_path`: one of the built-in names
/// (basic, simple, modest, complex) or a path to a space document.
std::shared_ptr<const FlatSpace> load_space(const std::string& name_or_path);

}  // namespace hdoe

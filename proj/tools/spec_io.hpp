#pragma once

#include <json.hpp>
#include <string>

#include "mca/decompose.hpp"
#include "mca/measure.hpp"
#include "mca/spectral.hpp"

namespace mca::lab {

using json = nlohmann::json;

/// Parses config text. Syntax errors raise Error{InvalidSpec} with line and
/// column; every other parse error names the JSON pointer of the bad field.
json parse_config_text(const std::string& text);

GroupPtr parse_group(const json& j, const std::string& path);
/// An element given by label (string) or by index (integer).
Element parse_element(const GroupPtr& g, const json& j, const std::string& path);
/// "center" | "commutator" | "trivial" | "whole" | [elements] | {"generated": [elements]}.
Subgroup parse_subgroup(const GroupPtr& g, const json& j, const std::string& path);
PseudoFramePtr parse_frame(const GroupPtr& g, const json& j, const std::string& path);
/// "identity" | {"conj": element} | {"power": k} | {"images": [elements]}.
GroupMap parse_endo(const GroupPtr& g, const json& j, const std::string& path);
McaRule parse_rule(const GroupPtr& g, const json& j, const std::string& path);
/// Cell law on an alphabet of the given size. "product" specs need a frame.
MeasureSpec parse_measure(const json& j, std::size_t alphabet, const PseudoFramePtr& frame, const std::string& path);
/// {"cells": {"<cell>": [coefficients]}, "phase": k}.
Character parse_character(const AbelianStructure& s, const json& j, const std::string& path);

json group_to_json(const FiniteGroup& g);
json rule_to_json(const McaRule& rule);
json labels_of(const FiniteGroup& g, std::span<const Element> xs);

}  // namespace mca::lab

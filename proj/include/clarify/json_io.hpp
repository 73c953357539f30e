#pragma once

// nlohmann::json conversions for the domain value types.

#include <nlohmann/json.hpp>

#include "clarify/domain.hpp"

namespace clarify {

using nlohmann::json;

void to_json(json& j, const Verdict& v);
void from_json(const json& j, Verdict& v);

void to_json(json& j, const VeracityScore& s);
void from_json(const json& j, VeracityScore& s);

void to_json(json& j, const Route& r);
void from_json(const json& j, Route& r);

void to_json(json& j, const CategoryAnnotation& a);
void from_json(const json& j, CategoryAnnotation& a);

void to_json(json& j, const Statement& s);
void from_json(const json& j, Statement& s);

// {"letter": "A", "name": "Speaker or person"}
json category_json(Category c);
std::vector<std::string> category_letters(const std::vector<Category>& cats);
std::vector<Category> categories_from_letters(const std::vector<std::string>& letters);

}  // namespace clarify

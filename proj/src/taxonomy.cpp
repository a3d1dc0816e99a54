#include "enose/taxonomy.hpp"

#include <cctype>

#include "enose/error.hpp"

namespace enose {
namespace {

constexpr std::array<GeneralClass, 14> kLabelClass{
    GeneralClass::Meat,      GeneralClass::Meat,      GeneralClass::Meat,
    GeneralClass::Vegetable, GeneralClass::Vegetable, GeneralClass::Vegetable,
    GeneralClass::Vegetable, GeneralClass::Fruit,     GeneralClass::Fruit,
    GeneralClass::Fruit,     GeneralClass::Fruit,     GeneralClass::Drink,
    GeneralClass::Drink,     GeneralClass::Drink,
};

constexpr std::array<std::string_view, 4> kClassNames{"Meat", "Vegetable", "Fruit", "Drink"};
constexpr std::array<std::string_view, 14> kLabelNames{
    "Pork",  "Steak",     "ChickenMeat", "Broccoli", "GreenPepper", "Mushroom", "Carrot",
    "Apple", "Tangerine", "Banana",      "Pear",     "Coffee",      "Milk",     "OrangeJuice",
};
constexpr std::array<std::string_view, 4> kFreshnessNames{"Fresh", "MostlyFresh",
                                                          "PartiallyRotten", "Rotten"};

std::string fold_key(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char ch : text) {
    if (ch == ' ' || ch == '_' || ch == '-') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view text, const std::array<std::string_view, N>& names) {
  const std::string key = fold_key(text);
  for (std::size_t i = 0; i < N; ++i) {
    if (fold_key(names[i]) == key) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

}  // namespace

GeneralClass class_of(SpecificLabel label) { return kLabelClass[index_of(label)]; }

std::span<const SpecificLabel> labels_of(GeneralClass c) {
  switch (c) {
    case GeneralClass::Meat:
      return std::span<const SpecificLabel>(kSpecificLabels).subspan(0, 3);
    case GeneralClass::Vegetable:
      return std::span<const SpecificLabel>(kSpecificLabels).subspan(3, 4);
    case GeneralClass::Fruit:
      return std::span<const SpecificLabel>(kSpecificLabels).subspan(7, 4);
    case GeneralClass::Drink:
      return std::span<const SpecificLabel>(kSpecificLabels).subspan(11, 3);
  }
  return {};
}

std::string_view name(GeneralClass c) { return kClassNames[index_of(c)]; }
std::string_view name(SpecificLabel label) { return kLabelNames[index_of(label)]; }
std::string_view name(FreshnessLevel level) { return kFreshnessNames[index_of(level)]; }

std::optional<GeneralClass> parse_general_class(std::string_view text) {
  return lookup<GeneralClass>(text, kClassNames);
}

std::optional<SpecificLabel> parse_specific_label(std::string_view text) {
  return lookup<SpecificLabel>(text, kLabelNames);
}

std::optional<FreshnessLevel> parse_freshness(std::string_view text) {
  return lookup<FreshnessLevel>(text, kFreshnessNames);
}

std::string encode_joint(SpecificLabel label, FreshnessLevel freshness) {
  std::string out(name(label));
  out += '/';
  out += name(freshness);
  return out;
}

std::pair<SpecificLabel, FreshnessLevel> decode_joint(std::string_view joint) {
  const auto slash = joint.find('/');
  if (slash != std::string_view::npos) {
    const auto label = parse_specific_label(joint.substr(0, slash));
    const auto level = parse_freshness(joint.substr(slash + 1));
    if (label && level) return {*label, *level};
  }
  throw UnknownLabel("not a joint label/freshness target: '" + std::string(joint) + "'");
}

}  // namespace enose

#pragma once

// Food taxonomy: four general classes, fourteen specific labels and four
// ordered freshness levels.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>

namespace enose {

enum class GeneralClass : std::uint8_t { Meat, Vegetable, Fruit, Drink };

enum class SpecificLabel : std::uint8_t {
  Pork,
  Steak,
  ChickenMeat,
  Broccoli,
  GreenPepper,
  Mushroom,
  Carrot,
  Apple,
  Tangerine,
  Banana,
  Pear,
  Coffee,
  Milk,
  OrangeJuice,
};

enum class FreshnessLevel : std::uint8_t { Fresh = 0, MostlyFresh = 1, PartiallyRotten = 2, Rotten = 3 };

inline constexpr std::array kGeneralClasses{GeneralClass::Meat, GeneralClass::Vegetable,
                                            GeneralClass::Fruit, GeneralClass::Drink};

inline constexpr std::array kSpecificLabels{
    SpecificLabel::Pork,      SpecificLabel::Steak,       SpecificLabel::ChickenMeat,
    SpecificLabel::Broccoli,  SpecificLabel::GreenPepper, SpecificLabel::Mushroom,
    SpecificLabel::Carrot,    SpecificLabel::Apple,       SpecificLabel::Tangerine,
    SpecificLabel::Banana,    SpecificLabel::Pear,        SpecificLabel::Coffee,
    SpecificLabel::Milk,      SpecificLabel::OrangeJuice,
};

inline constexpr std::array kFreshnessLevels{FreshnessLevel::Fresh, FreshnessLevel::MostlyFresh,
                                             FreshnessLevel::PartiallyRotten,
                                             FreshnessLevel::Rotten};

GeneralClass class_of(SpecificLabel label);

/// Labels belonging to `c`, in enum order.
std::span<const SpecificLabel> labels_of(GeneralClass c);

std::string_view name(GeneralClass c);
std::string_view name(SpecificLabel label);
std::string_view name(FreshnessLevel level);

// Case-insensitive; spaces, underscores and hyphens are ignored, so
// "green pepper", "GREEN_PEPPER" and "GreenPepper" all parse.
std::optional<GeneralClass> parse_general_class(std::string_view text);
std::optional<SpecificLabel> parse_specific_label(std::string_view text);
std::optional<FreshnessLevel> parse_freshness(std::string_view text);

constexpr std::size_t index_of(GeneralClass c) { return static_cast<std::size_t>(c); }
constexpr std::size_t index_of(SpecificLabel l) { return static_cast<std::size_t>(l); }
constexpr std::size_t index_of(FreshnessLevel f) { return static_cast<std::size_t>(f); }

struct Annotation {
  GeneralClass general_class{};
  SpecificLabel label{};
  FreshnessLevel freshness{};

  bool operator==(const Annotation&) const = default;
};

/// Joint (label, freshness) target used by the one-step baseline, e.g. "Banana/Rotten".
std::string encode_joint(SpecificLabel label, FreshnessLevel freshness);
/// Inverse of encode_joint; throws UnknownLabel on anything else.
std::pair<SpecificLabel, FreshnessLevel> decode_joint(std::string_view joint);

}  // namespace enose

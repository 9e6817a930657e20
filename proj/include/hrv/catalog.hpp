#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hrv {

/// Ordered list of feature names (with short descriptions) defining the
/// column order of every Dataset built against it.
struct FeatureCatalog {
    struct Entry {
        std::string name;
        std::string description;
    };

    std::vector<Entry> entries;

    std::size_t size() const { return entries.size(); }
    std::optional<std::size_t> index_of(std::string_view name) const;
    std::vector<std::string> names() const;

    static FeatureCatalog from_names(const std::vector<std::string>& names);
};

/// The fixed 57-metric HRV catalog used by the sepsis dataset.
const FeatureCatalog& hrv_catalog();

}  // namespace hrv

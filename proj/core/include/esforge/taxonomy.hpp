// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace esforge {

struct ProblemType {
    std::string category;
    std::string name;

    friend bool operator==(const ProblemType&, const ProblemType&) = default;
};

/// Problem-type taxonomy: five categories, 45 problem types by default.
///
/// Names are unique across the whole taxonomy. Construction rejects
/// duplicates and empty entries.
class Taxonomy {
public:
    Taxonomy() = default;
    explicit Taxonomy(std::vector<ProblemType> types);

    /// The built-in 45-entry taxonomy.
    static Taxonomy builtin();

    /// Tab-separated `category<TAB>name` lines; blank lines and `#` comments skipped.
    static Taxonomy load(const std::filesystem::path& path);
    static Taxonomy parse(std::string_view text);

    const std::vector<ProblemType>& types() const noexcept { return types_; }
    std::size_t size() const noexcept { return types_.size(); }
    bool empty() const noexcept { return types_.empty(); }

    /// Case-insensitive lookup by problem-type name.
    const ProblemType* find(std::string_view name) const;

    std::vector<std::string> categories() const;
    std::vector<ProblemType> in_category(std::string_view category) const;

private:
    std::vector<ProblemType> types_;
};

}  // namespace esforge

// SPDX-License-Identifier: Apache-2.0
#include "esforge/taxonomy.hpp"

#include "esforge/errors.hpp"
#include "esforge/text.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace esforge {

namespace {

struct Entry {
    const char* category;
    const char* name;
};

constexpr Entry kBuiltin[] = {
    {"Emotional and Mental Health Issues", "Anger Management Issues"},
    {"Emotional and Mental Health Issues", "Anxiety Disorders"},
    {"Emotional and Mental Health Issues", "Bipolar Disorder"},
    {"Emotional and Mental Health Issues", "Death of a Loved One"},
    {"Emotional and Mental Health Issues", "Emotional Fluctuations"},
    {"Emotional and Mental Health Issues", "Grief and Loss"},
    {"Emotional and Mental Health Issues", "Identity Crises"},
    {"Emotional and Mental Health Issues", "Obsessive-Compulsive Disorder (OCD)"},
    {"Emotional and Mental Health Issues", "Ongoing Depression"},
    {"Emotional and Mental Health Issues", "Post-Traumatic Stress Disorder (PTSD)"},
    {"Emotional and Mental Health Issues", "Schizophrenia"},
    {"Emotional and Mental Health Issues", "Self-Esteem Issues"},
    {"Emotional and Mental Health Issues", "Spirituality and Faith"},
    {"Emotional and Mental Health Issues", "Sexual Orientation"},
    {"Emotional and Mental Health Issues", "Healing from Sexual Assault or Domestic Violence"},
    {"Life and Work Stress", "Academic Pressure"},
    {"Life and Work Stress", "Burnout"},
    {"Life and Work Stress", "Chronic Stress"},
    {"Life and Work Stress", "Financial Problems"},
    {"Life and Work Stress", "Health Problems"},
    {"Life and Work Stress", "Job Crisis"},
    {"Life and Work Stress", "Life Transitions (e.g., Retirement, Relocation)"},
    {"Life and Work Stress", "Workplace Stress"},
    {"Interpersonal Relationships", "Breakups or Divorce"},
    {"Interpersonal Relationships", "Conflicts or Communication Problems"},
    {"Interpersonal Relationships", "Issues with Children"},
    {"Interpersonal Relationships", "Issues with Parents"},
    {"Interpersonal Relationships", "Marital Problems"},
    {"Interpersonal Relationships", "Problems with Friends"},
    {"Interpersonal Relationships", "School Bullying"},
    {"Interpersonal Relationships", "Culture Shock"},
    {"Personal Development", "Appearance Anxiety"},
    {"Personal Development", "Career Development Issues"},
    {"Personal Development", "Goal Setting Issues"},
    {"Personal Development", "Motivation Problems"},
    {"Personal Development", "Personal Growth Challenges"},
    {"Personal Development", "Procrastination"},
    {"Personal Development", "Sleep Problems"},
    {"Behavioral Issues", "Addictive Behaviors (e.g., Drug Use, Gambling)"},
    {"Behavioral Issues", "Alcohol Abuse"},
    {"Behavioral Issues", "Compulsive Behaviors"},
    {"Behavioral Issues", "Eating Disorders"},
    {"Behavioral Issues", "Internet Addiction"},
    {"Behavioral Issues", "Self-Harm Behaviors"},
    {"Behavioral Issues", "Debt Problems"},
};

}  // namespace

Taxonomy::Taxonomy(std::vector<ProblemType> types) : types_(std::move(types)) {
    std::set<std::string> seen;
    for (const auto& t : types_) {
        if (trim(t.name).empty() || trim(t.category).empty()) throw Error("taxonomy entry with empty field");
        if (!seen.insert(to_lower(t.name)).second) throw Error("duplicate problem type \"" + t.name + "\"");
    }
}

Taxonomy Taxonomy::builtin() {
    std::vector<ProblemType> types;
    types.reserve(std::size(kBuiltin));
    for (const auto& e : kBuiltin) types.push_back({e.category, e.name});
    return Taxonomy(std::move(types));
}

Taxonomy Taxonomy::parse(std::string_view text) {
    std::vector<ProblemType> types;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError("taxonomy line without tab separator", lineno);
        types.push_back({trim(line.substr(0, tab)), trim(line.substr(tab + 1))});
    }
    return Taxonomy(std::move(types));
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open taxonomy file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

const ProblemType* Taxonomy::find(std::string_view name) const {
    const auto it = std::find_if(types_.begin(), types_.end(), [&](const ProblemType& t) { return iequals(t.name, name); });
    return it == types_.end() ? nullptr : &*it;
}

std::vector<std::string> Taxonomy::categories() const {
    std::vector<std::string> out;
    for (const auto& t : types_) {
        if (std::find(out.begin(), out.end(), t.category) == out.end()) out.push_back(t.category);
    }
    return out;
}

std::vector<ProblemType> Taxonomy::in_category(std::string_view category) const {
    std::vector<ProblemType> out;
    std::copy_if(types_.begin(), types_.end(), std::back_inserter(out),
                 [&](const ProblemType& t) { return t.category == category; });
    return out;
}

}  // namespace esforge

#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace pilecast {

// Line-oriented `key = value` configuration with [section] headers and '#'
// comments. Keys are addressed as "section.key"; values set later win, so CLI
// overrides are plain set() calls on top of the loaded file.
class RunConfig {
public:
    static RunConfig load(const std::string& path);
    static RunConfig parse(const std::string& text);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::map<std::string, std::string> values_;
};

}  // namespace pilecast

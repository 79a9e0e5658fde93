#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fraclab/errors.hpp"

namespace fraclab {

// Flat key = value configuration with [section] headers; '#' and ';' start
// comments. Zero-dependency by design; the grammar is documented in the
// README.
class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback = "") const;
    double get_num(const std::string& section, const std::string& key,
                   double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& section, const std::string& key,
                          std::uint64_t fallback) const;
    // comma- or space-separated list of numbers
    std::vector<double> get_list(const std::string& section, const std::string& key,
                                 const std::vector<double>& fallback) const;
    // comma- or space-separated list of words
    std::vector<std::string> get_words(const std::string& section,
                                       const std::string& key) const;

  private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

} // namespace fraclab

#ifndef CFMIMO_CONFIG_PARSE_HPP
#define CFMIMO_CONFIG_PARSE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cfmimo {

// Shared helpers for the plain-text "key = value" config format.
// Lines starting with '#' (and inline '#' tails) are comments.

std::vector<std::pair<std::string, std::string>> parse_key_values(const std::string& text);

double parse_double(const std::string& key, const std::string& value);
int parse_int(const std::string& key, const std::string& value);
uint64_t parse_u64(const std::string& key, const std::string& value);

std::vector<std::string> split_list(const std::string& value);  // comma-separated
std::string trim(const std::string& s);

}  // namespace cfmimo

#endif

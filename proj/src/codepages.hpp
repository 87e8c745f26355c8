#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "cp2d/corpus.hpp"

namespace cp2d::detail {

struct CodePage {
    std::array<std::uint16_t, 256> to_unicode;
    std::array<std::uint8_t, 256> is_letter;
    std::array<std::uint8_t, 256> to_lower;
};

extern const CodePage k_latin1;
extern const CodePage k_latin2;

inline const CodePage& code_page(Encoding encoding) {
    return encoding == Encoding::latin2 ? k_latin2 : k_latin1;
}

// Contents of data/translit.tsv, embedded at configure time.
extern const std::string_view k_translit_table;

}  // namespace cp2d::detail

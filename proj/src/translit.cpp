// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0

#include "sandhi/translit.hpp"

#include "sandhi/error.hpp"

#include <algorithm>
#include <unordered_map>

namespace sandhi {

namespace {

constexpr char32_t kVirama = U'्';

struct VowelEntry {
    char slp1;
    char32_t independent;
    char32_t sign;  // 0 for the inherent vowel
};

// clang-format off
constexpr VowelEntry kVowels[] = {
    {'a', U'अ', 0},
    {'A', U'आ', U'ा'},
    {'i', U'इ', U'ि'},
    {'I', U'ई', U'ी'},
    {'u', U'उ', U'ु'},
    {'U', U'ऊ', U'ू'},
    {'f', U'ऋ', U'ृ'},
    {'F', U'ॠ', U'ॄ'},
    {'x', U'ऌ', U'ॢ'},
    {'X', U'ॡ', U'ॣ'},
    {'e', U'ए', U'े'},
    {'E', U'ऐ', U'ै'},
    {'o', U'ओ', U'ो'},
    {'O', U'औ', U'ौ'},
};

struct LetterEntry {
    char slp1;
    char32_t deva;
};

constexpr LetterEntry kConsonants[] = {
    {'k', U'क'}, {'K', U'ख'}, {'g', U'ग'}, {'G', U'घ'}, {'N', U'ङ'},
    {'c', U'च'}, {'C', U'छ'}, {'j', U'ज'}, {'J', U'झ'}, {'Y', U'ञ'},
    {'w', U'ट'}, {'W', U'ठ'}, {'q', U'ड'}, {'Q', U'ढ'}, {'R', U'ण'},
    {'t', U'त'}, {'T', U'थ'}, {'d', U'द'}, {'D', U'ध'}, {'n', U'न'},
    {'p', U'प'}, {'P', U'फ'}, {'b', U'ब'}, {'B', U'भ'}, {'m', U'म'},
    {'y', U'य'}, {'r', U'र'}, {'l', U'ल'}, {'L', U'ळ'}, {'v', U'व'},
    {'S', U'श'}, {'z', U'ष'}, {'s', U'स'}, {'h', U'ह'},
};

// Anusvara, visarga, candrabindu, avagraha.
constexpr LetterEntry kMarks[] = {
    {'M', U'ं'}, {'H', U'ः'}, {'~', U'ँ'}, {'\'', U'ऽ'},
};

struct IastEntry {
    char slp1;
    std::u32string_view iast;
};

constexpr IastEntry kIast[] = {
    {'a', U"a"}, {'A', U"ā"}, {'i', U"i"}, {'I', U"ī"}, {'u', U"u"}, {'U', U"ū"},
    {'f', U"ṛ"}, {'F', U"ṝ"}, {'x', U"ḷ"}, {'X', U"ḹ"},
    {'e', U"e"}, {'E', U"ai"}, {'o', U"o"}, {'O', U"au"},
    {'M', U"ṃ"}, {'H', U"ḥ"}, {'~', U"m̐"}, {'\'', U"'"},
    {'k', U"k"}, {'K', U"kh"}, {'g', U"g"}, {'G', U"gh"}, {'N', U"ṅ"},
    {'c', U"c"}, {'C', U"ch"}, {'j', U"j"}, {'J', U"jh"}, {'Y', U"ñ"},
    {'w', U"ṭ"}, {'W', U"ṭh"}, {'q', U"ḍ"}, {'Q', U"ḍh"}, {'R', U"ṇ"},
    {'t', U"t"}, {'T', U"th"}, {'d', U"d"}, {'D', U"dh"}, {'n', U"n"},
    {'p', U"p"}, {'P', U"ph"}, {'b', U"b"}, {'B', U"bh"}, {'m', U"m"},
    {'y', U"y"}, {'r', U"r"}, {'l', U"l"}, {'L', U"ḻ"}, {'v', U"v"},
    {'S', U"ś"}, {'z', U"ṣ"}, {'s', U"s"}, {'h', U"h"},
};

// Decomposed IAST sequences folded to their precomposed letters.
struct Composition {
    char32_t base;
    char32_t mark;
    char32_t composed;
};

constexpr Composition kCompositions[] = {
    {U'a', U'̄', U'ā'}, {U'i', U'̄', U'ī'}, {U'u', U'̄', U'ū'},
    {U'r', U'̣', U'ṛ'}, {U'l', U'̣', U'ḷ'}, {U'm', U'̣', U'ṃ'},
    {U'h', U'̣', U'ḥ'}, {U't', U'̣', U'ṭ'}, {U'd', U'̣', U'ḍ'},
    {U'n', U'̣', U'ṇ'}, {U's', U'̣', U'ṣ'},
    {U'ṛ', U'̄', U'ṝ'}, {U'ḷ', U'̄', U'ḹ'},
    {U'n', U'̇', U'ṅ'}, {U'm', U'̇', U'ṁ'}, {U'n', U'̃', U'ñ'},
    {U's', U'́', U'ś'}, {U'l', U'̱', U'ḻ'},
};
// clang-format on

bool is_passthrough(char32_t cp) noexcept {
    return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' || cp == static_cast<char32_t>(kSeparator);
}

struct Tables {
    std::unordered_map<char32_t, char> independent_vowel;
    std::unordered_map<char32_t, char> vowel_sign;
    std::unordered_map<char32_t, char> consonant;
    std::unordered_map<char32_t, char> mark;
    std::array<char32_t, 128> deva_letter{};  // consonants, marks, independent vowels
    std::array<char32_t, 128> deva_sign{};    // vowel signs
    std::array<std::u32string_view, 128> iast{};
    std::array<bool, 256> letter{};
    std::array<bool, 256> vowel{};
    std::array<bool, 256> cons{};
    std::string alphabet;

    Tables() {
        for (const auto& v : kVowels) {
            independent_vowel.emplace(v.independent, v.slp1);
            if (v.sign != 0) {
                vowel_sign.emplace(v.sign, v.slp1);
            }
            deva_letter[static_cast<unsigned char>(v.slp1)] = v.independent;
            deva_sign[static_cast<unsigned char>(v.slp1)] = v.sign;
            letter[static_cast<unsigned char>(v.slp1)] = true;
            vowel[static_cast<unsigned char>(v.slp1)] = true;
            alphabet.push_back(v.slp1);
        }
        for (const auto& c : kConsonants) {
            consonant.emplace(c.deva, c.slp1);
            deva_letter[static_cast<unsigned char>(c.slp1)] = c.deva;
            letter[static_cast<unsigned char>(c.slp1)] = true;
            cons[static_cast<unsigned char>(c.slp1)] = true;
            alphabet.push_back(c.slp1);
        }
        for (const auto& m : kMarks) {
            mark.emplace(m.deva, m.slp1);
            deva_letter[static_cast<unsigned char>(m.slp1)] = m.deva;
            letter[static_cast<unsigned char>(m.slp1)] = true;
            alphabet.push_back(m.slp1);
        }
        for (const auto& e : kIast) {
            iast[static_cast<unsigned char>(e.slp1)] = e.iast;
        }
    }
};

const Tables& tables() {
    static const Tables t;
    return t;
}

} // namespace

Scheme parse_scheme(std::string_view name) {
    if (name == "slp1") {
        return Scheme::Slp1;
    }
    if (name == "iast") {
        return Scheme::Iast;
    }
    if (name == "deva" || name == "devanagari") {
        return Scheme::Devanagari;
    }
    throw Error(ErrorCode::Config, "unknown transliteration scheme '" + std::string(name) + "'");
}

std::string_view scheme_name(Scheme scheme) noexcept {
    switch (scheme) {
        case Scheme::Slp1: return "slp1";
        case Scheme::Iast: return "iast";
        case Scheme::Devanagari: return "deva";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// UTF-8

namespace utf8 {

std::u32string decode(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            len = 1;
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            len = 2;
            cp = b0 & 0x1F;
        } else if ((b0 & 0xF0) == 0xE0) {
            len = 3;
            cp = b0 & 0x0F;
        } else if ((b0 & 0xF8) == 0xF0) {
            len = 4;
            cp = b0 & 0x07;
        } else {
            throw UnknownCodePointError(i, b0);
        }
        if (i + len > text.size()) {
            throw UnknownCodePointError(i, b0);
        }
        for (std::size_t k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) {
                throw UnknownCodePointError(i, b0);
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

void append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode(std::u32string_view text) {
    std::string out;
    out.reserve(text.size() * 3);
    for (char32_t cp : text) {
        append(out, cp);
    }
    return out;
}

} // namespace utf8

// ---------------------------------------------------------------------------
// SLP1 alphabet

namespace slp1 {

std::string_view alphabet() noexcept { return tables().alphabet; }
bool is_letter(char c) noexcept { return tables().letter[static_cast<unsigned char>(c)]; }
bool is_vowel(char c) noexcept { return tables().vowel[static_cast<unsigned char>(c)]; }
bool is_consonant(char c) noexcept { return tables().cons[static_cast<unsigned char>(c)]; }

} // namespace slp1

Slp1Text Slp1Text::parse(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!slp1::is_letter(text[i]) && text[i] != kSeparator) {
            throw UnknownCodePointError(i, static_cast<unsigned char>(text[i]));
        }
    }
    return Slp1Text(std::string(text));
}

bool Slp1Text::is_valid(std::string_view text) noexcept {
    return std::all_of(text.begin(), text.end(),
                       [](char c) { return slp1::is_letter(c) || c == kSeparator; });
}

// ---------------------------------------------------------------------------
// Devanagari

std::string devanagari_to_slp1(std::string_view utf8_text) {
    const auto& t = tables();
    const std::u32string cps = utf8::decode(utf8_text);
    std::string out;
    out.reserve(cps.size() * 2);

    for (std::size_t i = 0; i < cps.size(); ++i) {
        const char32_t cp = cps[i];
        if (is_passthrough(cp)) {
            out.push_back(static_cast<char>(cp));
            continue;
        }
        if (auto it = t.consonant.find(cp); it != t.consonant.end()) {
            out.push_back(it->second);
            const char32_t next = i + 1 < cps.size() ? cps[i + 1] : 0;
            if (next == kVirama) {
                ++i;
            } else if (auto sign = t.vowel_sign.find(next); sign != t.vowel_sign.end()) {
                out.push_back(sign->second);
                ++i;
            } else {
                out.push_back('a');
            }
            continue;
        }
        if (auto it = t.independent_vowel.find(cp); it != t.independent_vowel.end()) {
            out.push_back(it->second);
            continue;
        }
        if (auto it = t.mark.find(cp); it != t.mark.end()) {
            out.push_back(it->second);
            continue;
        }
        // Stray vowel signs, viramas and anything else are not words.
        throw UnknownCodePointError(i, cp);
    }
    return out;
}

std::string slp1_to_devanagari(std::string_view slp1_text) {
    const auto& t = tables();
    std::string out;
    out.reserve(slp1_text.size() * 3);

    for (std::size_t i = 0; i < slp1_text.size(); ++i) {
        const char c = slp1_text[i];
        const auto uc = static_cast<unsigned char>(c);
        if (is_passthrough(uc)) {
            out.push_back(c);
            continue;
        }
        if (!slp1::is_letter(c)) {
            throw UnknownCodePointError(i, uc);
        }
        utf8::append(out, t.deva_letter[uc]);
        if (!slp1::is_consonant(c)) {
            continue;
        }
        const char next = i + 1 < slp1_text.size() ? slp1_text[i + 1] : '\0';
        if (slp1::is_vowel(next)) {
            const char32_t sign = t.deva_sign[static_cast<unsigned char>(next)];
            if (sign != 0) {
                utf8::append(out, sign);
            }
            ++i;
        } else {
            utf8::append(out, kVirama);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// IAST

std::string iast_to_slp1(std::string_view utf8_text) {
    const std::u32string raw = utf8::decode(utf8_text);

    // Fold decomposed sequences, remembering each letter's original offset.
    std::u32string cps;
    std::vector<std::size_t> origin;
    cps.reserve(raw.size());
    origin.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const char32_t cp = raw[i];
        if (!cps.empty()) {
            bool folded = false;
            for (const auto& comp : kCompositions) {
                if (comp.base == cps.back() && comp.mark == cp) {
                    cps.back() = comp.composed;
                    folded = true;
                    break;
                }
            }
            if (folded) {
                continue;
            }
        }
        cps.push_back(cp);
        origin.push_back(i);
    }

    // Longest match against the IAST spellings (at most two code points,
    // except the candrabindu sequence which is also two).
    std::string out;
    out.reserve(cps.size());
    std::size_t i = 0;
    while (i < cps.size()) {
        const char32_t cp = cps[i];
        if (is_passthrough(cp)) {
            out.push_back(static_cast<char>(cp));
            ++i;
            continue;
        }
        char best = 0;
        std::size_t best_len = 0;
        for (const auto& e : kIast) {
            const std::size_t len = e.iast.size();
            if (len <= best_len || i + len > cps.size()) {
                continue;
            }
            if (std::u32string_view(cps).substr(i, len) == e.iast) {
                best = e.slp1;
                best_len = len;
            }
        }
        if (cp == U'ṁ') {  // m with dot above, an alternative anusvara spelling
            best = 'M';
            best_len = 1;
        }
        if (best_len == 0) {
            throw UnknownCodePointError(origin[i], cp);
        }
        out.push_back(best);
        i += best_len;
    }
    return out;
}

std::string slp1_to_iast(std::string_view slp1_text) {
    const auto& t = tables();
    std::string out;
    out.reserve(slp1_text.size() * 2);
    for (std::size_t i = 0; i < slp1_text.size(); ++i) {
        const auto uc = static_cast<unsigned char>(slp1_text[i]);
        if (is_passthrough(uc)) {
            out.push_back(slp1_text[i]);
            continue;
        }
        if (!slp1::is_letter(slp1_text[i])) {
            throw UnknownCodePointError(i, uc);
        }
        for (char32_t cp : t.iast[uc]) {
            utf8::append(out, cp);
        }
    }
    return out;
}

std::string to_slp1(std::string_view text, Scheme from) {
    switch (from) {
        case Scheme::Slp1: {
            for (std::size_t i = 0; i < text.size(); ++i) {
                const auto uc = static_cast<unsigned char>(text[i]);
                if (!slp1::is_letter(text[i]) && !is_passthrough(uc)) {
                    throw UnknownCodePointError(i, uc);
                }
            }
            return std::string(text);
        }
        case Scheme::Iast: return iast_to_slp1(text);
        case Scheme::Devanagari: return devanagari_to_slp1(text);
    }
    return {};
}

std::string from_slp1(std::string_view slp1_text, Scheme to) {
    switch (to) {
        case Scheme::Slp1: return to_slp1(slp1_text, Scheme::Slp1);
        case Scheme::Iast: return slp1_to_iast(slp1_text);
        case Scheme::Devanagari: return slp1_to_devanagari(slp1_text);
    }
    return {};
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary Vocabulary::build(std::span<const std::string> corpus) {
    if (corpus.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "cannot build a vocabulary from an empty corpus");
    }
    std::array<bool, 256> seen{};
    for (const auto& word : corpus) {
        for (char c : word) {
            seen[static_cast<unsigned char>(c)] = true;
        }
    }
    seen[static_cast<unsigned char>(kSeparator)] = false;
    Vocabulary v;
    for (int c = 0; c < 256; ++c) {
        if (seen[c]) {
            v.chars_.push_back(static_cast<char>(c));
        }
    }
    v.index();
    return v;
}

Vocabulary Vocabulary::from_chars(std::string_view chars) {
    Vocabulary v;
    v.chars_ = std::string(chars);
    v.index();
    if (v.chars_.find(kSeparator) != std::string::npos) {
        throw Error(ErrorCode::Config, "vocabulary characters must not contain the separator");
    }
    return v;
}

void Vocabulary::index() {
    id_of_.fill(-1);
    for (std::size_t i = 0; i < chars_.size(); ++i) {
        id_of_[static_cast<unsigned char>(chars_[i])] = kNumSpecials + static_cast<int>(i);
    }
    id_of_[static_cast<unsigned char>(kSeparator)] = kSep;
}

std::optional<int> Vocabulary::find(char c) const noexcept {
    const int id = id_of_[static_cast<unsigned char>(c)];
    if (id < 0) {
        return std::nullopt;
    }
    return id;
}

int Vocabulary::id_of(char c) const {
    if (auto id = find(c)) {
        return *id;
    }
    throw Error(ErrorCode::OovCharacter, std::string("character '") + c + "' is not in the vocabulary");
}

char Vocabulary::char_of(int id) const {
    if (id == kSep) {
        return kSeparator;
    }
    if (id < kNumSpecials || static_cast<std::size_t>(id) >= size()) {
        return '\0';
    }
    return chars_[static_cast<std::size_t>(id - kNumSpecials)];
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
    std::vector<int> ids;
    ids.reserve(text.size());
    for (char c : text) {
        ids.push_back(id_of(c));
    }
    return ids;
}

std::string Vocabulary::decode(std::span<const int> ids) const {
    std::string out;
    out.reserve(ids.size());
    for (int id : ids) {
        if (const char c = char_of(id); c != '\0') {
            out.push_back(c);
        }
    }
    return out;
}

} // namespace sandhi

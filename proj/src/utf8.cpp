#include "codemix/utf8.hpp"

namespace codemix::utf8 {

std::vector<std::uint32_t> decode(std::string_view s) {
    std::vector<std::uint32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        std::uint32_t cp = c;
        std::size_t extra = 0;
        if (c >= 0xF0)
            cp = c & 0x07, extra = 3;
        else if (c >= 0xE0)
            cp = c & 0x0F, extra = 2;
        else if (c >= 0xC0)
            cp = c & 0x1F, extra = 1;
        if (i + extra >= s.size()) {
            out.push_back(c); // truncated sequence, keep raw byte
            ++i;
            continue;
        }
        bool ok = true;
        for (std::size_t k = 1; k <= extra; ++k) {
            unsigned char cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok) {
            out.push_back(c);
            ++i;
        } else {
            out.push_back(cp);
            i += extra + 1;
        }
    }
    return out;
}

std::string encode_one(std::uint32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

std::string encode(const std::vector<std::uint32_t>& cps) {
    std::string out;
    for (auto cp : cps) out += encode_one(cp);
    return out;
}

std::size_t length(std::string_view s) { return decode(s).size(); }

std::string suffix(std::string_view s, std::size_t n) {
    auto cps = decode(s);
    if (cps.size() <= n) return std::string(s);
    return encode({cps.end() - static_cast<std::ptrdiff_t>(n), cps.end()});
}

std::string prefix(std::string_view s, std::size_t n) {
    auto cps = decode(s);
    if (cps.size() <= n) return std::string(s);
    return encode({cps.begin(), cps.begin() + static_cast<std::ptrdiff_t>(n)});
}

} // namespace codemix::utf8

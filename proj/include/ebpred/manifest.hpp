#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>

#include "ebpred/errors.hpp"

namespace ebpred {

namespace detail {

// Compact SHA-1, enough for git-style blob hashes of input files.
class Sha1 {
  public:
    Sha1() { reset(); }

    void reset() {
        h_ = {0x67452301u, 0xEFCDAB89u, 0x98BADCFEu, 0x10325476u, 0xC3D2E1F0u};
        len_ = 0;
        buf_used_ = 0;
    }

    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        len_ += n;
        while (n > 0) {
            const std::size_t take = std::min<std::size_t>(64 - buf_used_, n);
            std::memcpy(buf_.data() + buf_used_, p, take);
            buf_used_ += take;
            p += take;
            n -= take;
            if (buf_used_ == 64) {
                process(buf_.data());
                buf_used_ = 0;
            }
        }
    }

    std::string hex_digest() {
        const std::uint64_t bit_len = len_ * 8;
        const unsigned char one = 0x80;
        update(&one, 1);
        const unsigned char zero = 0x00;
        while (buf_used_ != 56) update(&zero, 1);
        unsigned char lenbuf[8];
        for (int i = 0; i < 8; ++i) lenbuf[i] = static_cast<unsigned char>(bit_len >> (56 - 8 * i));
        std::memcpy(buf_.data() + buf_used_, lenbuf, 8);
        process(buf_.data());
        std::ostringstream os;
        os << std::hex << std::setfill('0');
        for (std::uint32_t w : h_) os << std::setw(8) << w;
        return os.str();
    }

  private:
    static std::uint32_t rol(std::uint32_t v, int s) { return (v << s) | (v >> (32 - s)); }

    void process(const unsigned char* block) {
        std::array<std::uint32_t, 80> w{};
        for (int i = 0; i < 16; ++i)
            w[i] = (std::uint32_t(block[4 * i]) << 24) | (std::uint32_t(block[4 * i + 1]) << 16) |
                   (std::uint32_t(block[4 * i + 2]) << 8) | std::uint32_t(block[4 * i + 3]);
        for (int i = 16; i < 80; ++i) w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        std::uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3], e = h_[4];
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | (~b & d);
                k = 0x5A827999u;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1u;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDCu;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6u;
            }
            const std::uint32_t t = rol(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rol(b, 30);
            b = a;
            a = t;
        }
        h_[0] += a;
        h_[1] += b;
        h_[2] += c;
        h_[3] += d;
        h_[4] += e;
    }

    std::array<std::uint32_t, 5> h_{};
    std::array<unsigned char, 64> buf_{};
    std::uint64_t len_ = 0;
    std::size_t buf_used_ = 0;
};

}  // namespace detail

/// Git-style content hash of a file: sha1("blob <size>\0" + bytes).
inline std::string git_blob_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for hashing");
    std::ostringstream body;
    body << in.rdbuf();
    const std::string bytes = body.str();
    detail::Sha1 sha;
    const std::string prefix = "blob " + std::to_string(bytes.size());
    sha.update(prefix.data(), prefix.size());
    const char nul = '\0';
    sha.update(&nul, 1);
    sha.update(bytes.data(), bytes.size());
    return sha.hex_digest();
}

/// Flat key=value run manifest. Keys are written sorted so manifests diff
/// cleanly; informational keys (hashes, timing) are ignored on reload.
class Manifest {
  public:
    void set(const std::string& key, std::string value) { kv_[key] = std::move(value); }

    bool has(const std::string& key) const { return kv_.count(key) > 0; }

    const std::string& get(const std::string& key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError("manifest key missing: " + key);
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        const auto it = kv_.find(key);
        return it == kv_.end() ? fallback : it->second;
    }

    const std::map<std::string, std::string>& entries() const { return kv_; }

    void save(const std::filesystem::path& path) const {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        for (const auto& [k, v] : kv_) out << k << "=" << v << "\n";
    }

    static Manifest load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path.string());
        Manifest m;
        std::string line;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line.front() == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("manifest line " + std::to_string(line_no) +
                                 " is not key=value: " + line);
            m.kv_[line.substr(0, eq)] = line.substr(eq + 1);
        }
        return m;
    }

  private:
    std::map<std::string, std::string> kv_;
};

}  // namespace ebpred

#include "archgraph/hashing.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <memory>

#include "archgraph/error.hpp"

namespace archgraph {

namespace {

using MdCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

void digest(const EVP_MD* md, std::string_view prefix, std::string_view data,
                   unsigned* out_len, unsigned char* out) {
  MdCtx ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), md, nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), prefix.data(), prefix.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), out, out_len) != 1) {
    throw Error(ErrorCode::kInternal, "digest computation failed");
  }
}

std::string to_hex(const unsigned char* bytes, size_t n) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(n * 2, '0');
  for (size_t i = 0; i < n; ++i) {
    out[2 * i] = kHex[bytes[i] >> 4];
    out[2 * i + 1] = kHex[bytes[i] & 0xF];
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> buf{};
  unsigned len = 0;
  digest(EVP_sha256(), {}, data, &len, buf.data());
  return to_hex(buf.data(), len);
}

std::string content_hash(std::span<const std::string> parts) {
  std::string joined;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) joined.push_back('\x1f');
    joined.append(parts[i]);
  }
  return sha256_hex(joined).substr(0, 32);
}

std::string uuid_v5(std::string_view name) {
  // 6ba7b811-9dad-11d1-80b4-00c04fd430c8
  static constexpr unsigned char kUrlNamespace[16] = {0x6b, 0xa7, 0xb8, 0x11, 0x9d, 0xad,
                                                      0x11, 0xd1, 0x80, 0xb4, 0x00, 0xc0,
                                                      0x4f, 0xd4, 0x30, 0xc8};
  std::array<unsigned char, EVP_MAX_MD_SIZE> buf{};
  unsigned len = 0;
  digest(EVP_sha1(),
         std::string_view(reinterpret_cast<const char*>(kUrlNamespace), sizeof kUrlNamespace),
         name, &len, buf.data());
  buf[6] = static_cast<unsigned char>((buf[6] & 0x0F) | 0x50);
  buf[8] = static_cast<unsigned char>((buf[8] & 0x3F) | 0x80);
  std::string hex = to_hex(buf.data(), 16);
  return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" +
         hex.substr(16, 4) + "-" + hex.substr(20, 12);
}

}  // namespace archgraph

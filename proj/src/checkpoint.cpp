// SPDX-License-Identifier: Apache-2.0
#include "deshade/checkpoint.hpp"

#include <cstdint>
#include <fstream>

namespace deshade::ckpt {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'H', 'C', 'K', 'P', 'T', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff),
                 static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (b[1] << 8) | (b[2] << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

static_assert(sizeof(float) == 4, "float must be IEEE-754 binary32");

}  // namespace

void save(const std::string& path, const Archive& archive) {
    std::ofstream os(path, std::ios::binary);
    require(os.good(), "cannot write checkpoint: " + path);
    os.write(kMagic, sizeof(kMagic));
    const std::string meta = archive.meta.dump();
    write_u32(os, static_cast<std::uint32_t>(meta.size()));
    os.write(meta.data(), static_cast<std::streamsize>(meta.size()));
    write_u32(os, static_cast<std::uint32_t>(archive.tensors.size()));
    for (const auto& [name, t] : archive.tensors) {
        write_u32(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(os, static_cast<std::uint32_t>(t.shape.h));
        write_u32(os, static_cast<std::uint32_t>(t.shape.w));
        write_u32(os, static_cast<std::uint32_t>(t.shape.c));
        write_u32(os, static_cast<std::uint32_t>(t.shape.n));
        os.write(reinterpret_cast<const char*>(t.data.data()),
                 static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    }
    require(os.good(), "checkpoint write failed: " + path);
}

Archive load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    require(is.good(), "cannot open checkpoint: " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    require(is.good() && std::equal(magic, magic + 8, kMagic),
            "not a checkpoint archive: " + path);
    Archive a;
    const std::uint32_t meta_len = read_u32(is);
    std::string meta(meta_len, '\0');
    is.read(meta.data(), meta_len);
    a.meta = nlohmann::json::parse(meta);
    const std::uint32_t n = read_u32(is);
    for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t name_len = read_u32(is);
        std::string name(name_len, '\0');
        is.read(name.data(), name_len);
        Shape s;
        s.h = static_cast<int>(read_u32(is));
        s.w = static_cast<int>(read_u32(is));
        s.c = static_cast<int>(read_u32(is));
        s.n = static_cast<int>(read_u32(is));
        Tensor<float> t(s);
        is.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.data.size() * sizeof(float)));
        require(is.good(), "truncated checkpoint: " + path);
        a.tensors.emplace(std::move(name), std::move(t));
    }
    return a;
}

}  // namespace ckpt

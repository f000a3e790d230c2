// Copyright 2026 The bpire Authors
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file bpire/dump.hpp
//! Raw sample dumps.
//!
//! Text: one value per line (unsigned decimal, or %.17g for reals).
//! Binary: 8-byte magic "BPIRE001" followed by little-endian u64 values.
//---------------------------------------------------------------------------//
#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace bpire
{
inline constexpr std::array<char, 8> kDumpMagic
    = {'B', 'P', 'I', 'R', 'E', '0', '0', '1'};

namespace detail
{
inline std::ofstream open_for_write(std::filesystem::path const& path,
                                    std::ios::openmode mode = std::ios::out)
{
    std::ofstream out(path, mode | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

inline void finish_write(std::ofstream& out, std::filesystem::path const& path)
{
    out.flush();
    if (!out)
        throw IoError("write failed: " + path.string());
}
}  // namespace detail

inline void write_text_dump(std::filesystem::path const& path,
                            std::span<std::uint64_t const> values)
{
    auto out = detail::open_for_write(path);
    for (auto v : values)
        out << v << '\n';
    detail::finish_write(out, path);
}

inline void write_text_dump(std::filesystem::path const& path,
                            std::span<double const> values)
{
    auto out = detail::open_for_write(path);
    char buf[32];
    for (auto v : values)
    {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    }
    detail::finish_write(out, path);
}

inline void write_binary_dump(std::filesystem::path const& path,
                              std::span<std::uint64_t const> values)
{
    auto out = detail::open_for_write(path, std::ios::out | std::ios::binary);
    out.write(kDumpMagic.data(), kDumpMagic.size());
    for (std::uint64_t v : values)
    {
        std::array<char, 8> bytes;
        for (int b = 0; b < 8; ++b)
            bytes[b] = static_cast<char>((v >> (8 * b)) & 0xff);
        out.write(bytes.data(), bytes.size());
    }
    detail::finish_write(out, path);
}

/// Reads either integer format, detected by the magic header.
inline std::vector<std::uint64_t>
read_count_dump(std::filesystem::path const& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::array<char, 8> head{};
    in.read(head.data(), head.size());
    std::vector<std::uint64_t> values;
    if (in.gcount() == 8 && head == kDumpMagic)
    {
        std::array<unsigned char, 8> bytes;
        while (in.read(reinterpret_cast<char*>(bytes.data()), 8))
        {
            std::uint64_t v = 0;
            for (int b = 7; b >= 0; --b)
                v = (v << 8) | bytes[b];
            values.push_back(v);
        }
        if (in.gcount() != 0)
            throw IoError("truncated binary dump: " + path.string());
        return values;
    }

    in.clear();
    in.seekg(0);
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::size_t used = 0;
        try
        {
            values.push_back(std::stoull(line, &used));
        }
        catch (std::exception const&)
        {
            used = 0;
        }
        if (used != line.size() || line.front() == '-')
            throw IoError("bad dump line in " + path.string() + ": " + line);
    }
    return values;
}

inline std::vector<double> read_real_dump(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::size_t used = 0;
        try
        {
            values.push_back(std::stod(line, &used));
        }
        catch (std::exception const&)
        {
            used = 0;
        }
        if (used != line.size())
            throw IoError("bad dump line in " + path.string() + ": " + line);
    }
    return values;
}

}  // namespace bpire

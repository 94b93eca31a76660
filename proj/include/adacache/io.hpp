#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "sampler.hpp"
#include "tensor.hpp"

namespace adacache {

/*============================= plain text files ===========================*/

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw io_error("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/*============================== latent binary =============================*/

// Self-describing little-endian container:
//   "ACLT" | u32 version (1) | u32 ndim | i32 dims[ndim] | f32 data[numel]

inline constexpr uint32_t latent_format_version = 1;

namespace detail {

inline void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}

inline uint32_t get_u32(const std::string& in, size_t& at, const std::string& path) {
    if (at + 4 > in.size()) throw io_error("latent file truncated: " + path);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<uint32_t>(static_cast<unsigned char>(in[at + static_cast<size_t>(i)]))
             << (8 * i);
    }
    at += 4;
    return v;
}

}  // namespace detail

inline std::string latent_to_bytes(const Tensor& t) {
    std::string out = "ACLT";
    detail::put_u32(out, latent_format_version);
    detail::put_u32(out, static_cast<uint32_t>(t.shape.size()));
    for (int d : t.shape) detail::put_u32(out, static_cast<uint32_t>(d));
    for (float v : t.data) detail::put_u32(out, std::bit_cast<uint32_t>(v));
    return out;
}

inline Tensor latent_from_bytes(const std::string& bytes, const std::string& path = "<memory>") {
    if (bytes.size() < 4 || bytes.compare(0, 4, "ACLT") != 0) {
        throw io_error("latent file: bad magic: " + path);
    }
    size_t at = 4;
    const uint32_t version = detail::get_u32(bytes, at, path);
    if (version != latent_format_version) {
        throw io_error("latent file: unsupported version " + std::to_string(version) + ": " + path);
    }
    const uint32_t ndim = detail::get_u32(bytes, at, path);
    if (ndim == 0 || ndim > 8) throw io_error("latent file: implausible rank: " + path);
    std::vector<int> shape(ndim);
    size_t numel = 1;
    for (uint32_t i = 0; i < ndim; ++i) {
        const uint32_t d = detail::get_u32(bytes, at, path);
        if (d == 0 || d > (1u << 24)) throw io_error("latent file: implausible dimension: " + path);
        shape[i] = static_cast<int>(d);
        numel *= d;
    }
    if (bytes.size() - at != numel * 4) throw io_error("latent file truncated: " + path);
    Tensor t(shape);
    for (size_t i = 0; i < numel; ++i) {
        t.data[i] = std::bit_cast<float>(detail::get_u32(bytes, at, path));
    }
    return t;
}

inline void write_latent(const std::string& path, const Tensor& t) {
    write_text_file(path, latent_to_bytes(t));
}

inline Tensor read_latent(const std::string& path) {
    return latent_from_bytes(read_text_file(path), path);
}

/*=============================== trace jsonl ==============================*/

// One record per line, fixed field order, optional fields simply absent —
// byte-identical across reruns of the same configuration.

inline std::string trace_to_jsonl(const RunTrace& trace) {
    std::string out;
    for (const auto& r : trace.steps) {
        nlohmann::ordered_json j;
        j["step"]     = r.step;
        j["computed"] = r.computed;
        if (r.metric) j["metric"] = *r.metric;
        if (r.rate) j["rate"] = *r.rate;
        if (r.m) j["m"] = *r.m;
        if (r.mg) j["mg"] = *r.mg;
        j["flops"] = r.flops;
        out += j.dump();
        out += "\n";
    }
    return out;
}

inline RunTrace trace_from_jsonl(const std::string& text, const std::string& path = "<memory>") {
    RunTrace trace;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw io_error("trace line " + std::to_string(lineno) + ": " + e.what() + ": " + path);
        }
        try {
            StepRecord r;
            r.step     = j.at("step").get<int>();
            r.computed = j.at("computed").get<bool>();
            if (j.contains("metric")) r.metric = j["metric"].get<double>();
            if (j.contains("rate")) r.rate = j["rate"].get<int>();
            if (j.contains("m")) r.m = j["m"].get<double>();
            if (j.contains("mg")) r.mg = j["mg"].get<double>();
            r.flops = j.at("flops").get<uint64_t>();
            trace.steps.push_back(r);
        } catch (const nlohmann::json::exception& e) {
            throw io_error("trace line " + std::to_string(lineno) + ": " + e.what() + ": " + path);
        }
    }
    return trace;
}

inline void write_trace(const std::string& path, const RunTrace& trace) {
    write_text_file(path, trace_to_jsonl(trace));
}

inline RunTrace read_trace(const std::string& path) {
    return trace_from_jsonl(read_text_file(path), path);
}

}  // namespace adacache

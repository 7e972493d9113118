#include "edgebin/serialize.hpp"

#include <array>
#include <bit>
#include <fstream>

#include <nlohmann/json.hpp>

#include "edgebin/validate.hpp"

namespace edgebin {

using nlohmann::json;

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    uint32_t c = seed ^ 0xFFFFFFFFu;
    for (size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xFFu] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

namespace {

constexpr uint32_t kFormatVersion = 1;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 24));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t get_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | static_cast<uint32_t>(p[1]) << 8 |
           static_cast<uint32_t>(p[2]) << 16 | static_cast<uint32_t>(p[3]) << 24;
}

uint64_t get_u64(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

// Weight elements are written little-endian regardless of host order.
void append_weight_bytes(std::vector<uint8_t>& blob, const Tensor& t) {
    static_assert(std::endian::native == std::endian::little ||
                      std::endian::native == std::endian::big,
                  "mixed-endian hosts unsupported");
    const size_t elem = dtype_bytes(t.dtype());
    const uint8_t* src = t.raw();
    if constexpr (std::endian::native == std::endian::little) {
        blob.insert(blob.end(), src, src + t.byte_size());
    } else {
        for (size_t i = 0; i < t.byte_size(); i += elem)
            for (size_t b = 0; b < elem; ++b) blob.push_back(src[i + elem - 1 - b]);
    }
}

void read_weight_bytes(Tensor& t, const uint8_t* src) {
    const size_t elem = dtype_bytes(t.dtype());
    uint8_t* dst = t.raw();
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(dst, src, t.byte_size());
    } else {
        for (size_t i = 0; i < t.byte_size(); i += elem)
            for (size_t b = 0; b < elem; ++b) dst[i + b] = src[i + elem - 1 - b];
    }
}

json attr_to_json(const AttrValue& v) {
    json j;
    if (std::holds_alternative<int64_t>(v)) {
        j["i"] = std::get<int64_t>(v);
    } else if (std::holds_alternative<double>(v)) {
        j["d"] = std::get<double>(v);
    } else if (std::holds_alternative<std::string>(v)) {
        j["s"] = std::get<std::string>(v);
    } else {
        j["il"] = std::get<std::vector<int64_t>>(v);
    }
    return j;
}

AttrValue attr_from_json(const json& j) {
    if (j.contains("i")) return j["i"].get<int64_t>();
    if (j.contains("d")) return j["d"].get<double>();
    if (j.contains("s")) return j["s"].get<std::string>();
    if (j.contains("il")) return j["il"].get<std::vector<int64_t>>();
    throw Error(ErrorCode::CorruptManifest, "malformed attribute value");
}

json quant_to_json(const QuantParams& q) {
    return json{{"scale", q.scale}, {"zero_point", q.zero_point}};
}

QuantParams quant_from_json(const json& j) {
    QuantParams q;
    q.scale = j.at("scale").get<float>();
    q.zero_point = j.at("zero_point").get<int>();
    return q;
}

}  // namespace

namespace {

// blob: weights in ascending node-id order; pass nullptr to lay out offsets
// without copying bytes
json build_manifest(const Graph& graph, std::vector<uint8_t>* blob) {
    size_t offset = 0;
    json jweights = json::array();
    for (const auto& [id, t] : graph.weights) {
        json jw;
        jw["id"] = id;
        jw["dtype"] = dtype_name(t.dtype());
        jw["shape"] = t.shape();
        jw["offset"] = offset;
        jw["bytes"] = t.byte_size();
        if (t.quant()) jw["quant"] = quant_to_json(*t.quant());
        if (blob) append_weight_bytes(*blob, t);
        offset += t.byte_size();
        jweights.push_back(std::move(jw));
    }

    json manifest;
    manifest["format"] = "edgebin-model";
    manifest["name"] = graph.metadata.name;
    manifest["class_labels"] = graph.metadata.class_labels;
    manifest["inputs"] = graph.inputs;
    manifest["outputs"] = graph.outputs;
    json jnodes = json::array();
    for (const Node& n : graph.nodes) {
        json jn;
        jn["id"] = n.id;
        jn["kind"] = op_kind_name(n.kind);
        jn["inputs"] = n.inputs;
        json jattrs = json::object();
        for (const auto& [k, v] : n.attrs) jattrs[k] = attr_to_json(v);
        jn["attrs"] = std::move(jattrs);
        if (n.out_shape) jn["shape"] = *n.out_shape;
        if (n.out_quant) jn["quant"] = quant_to_json(*n.out_quant);
        jnodes.push_back(std::move(jn));
    }
    manifest["nodes"] = std::move(jnodes);
    manifest["weights"] = std::move(jweights);
    manifest["blob_crc32"] = blob ? crc32(blob->data(), blob->size()) : 0u;
    return manifest;
}

}  // namespace

size_t manifest_byte_size(const Graph& graph) {
    return build_manifest(graph, nullptr).dump(1).size();
}

void save(const Graph& graph, const std::filesystem::path& path) {
    auto diags = validate(graph);
    if (!diags.empty())
        throw Error(ErrorCode::InvalidArgument,
                    "refusing to save invalid graph:\n" + format_diagnostics(diags));

    std::vector<uint8_t> blob;
    const std::string mstr = build_manifest(graph, &blob).dump(1);

    std::vector<uint8_t> out;
    out.reserve(mstr.size() + blob.size() + 32);
    out.insert(out.end(), {'E', 'B', 'I', 'N'});
    put_u32(out, kFormatVersion);
    put_u64(out, mstr.size());
    out.insert(out.end(), mstr.begin(), mstr.end());
    put_u64(out, blob.size());
    out.insert(out.end(), blob.begin(), blob.end());

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error(ErrorCode::Io, "short write to " + path.string());
}

Graph load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());

    if (bytes.size() < 16 || bytes[0] != 'E' || bytes[1] != 'B' || bytes[2] != 'I' ||
        bytes[3] != 'N')
        throw Error(ErrorCode::CorruptManifest, path.string() + " is not a model file");
    uint32_t version = get_u32(bytes.data() + 4);
    if (version != kFormatVersion)
        throw Error(ErrorCode::CorruptManifest,
                    "unsupported model format version " + std::to_string(version));
    uint64_t mlen = get_u64(bytes.data() + 8);
    if (16 + mlen + 8 > bytes.size())
        throw Error(ErrorCode::CorruptManifest, "manifest length exceeds file size");

    json manifest;
    try {
        manifest = json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<long>(mlen));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptManifest, std::string("manifest parse: ") + e.what());
    }

    const uint8_t* blob_len_p = bytes.data() + 16 + mlen;
    uint64_t blob_len = get_u64(blob_len_p);
    if (16 + mlen + 8 + blob_len > bytes.size())
        throw Error(ErrorCode::ChecksumMismatch, "weight blob truncated");
    const uint8_t* blob = blob_len_p + 8;

    try {
        uint32_t want_crc = manifest.at("blob_crc32").get<uint32_t>();
        if (crc32(blob, blob_len) != want_crc)
            throw Error(ErrorCode::ChecksumMismatch, "weight blob checksum mismatch");

        Graph g;
        g.metadata.name = manifest.at("name").get<std::string>();
        g.metadata.class_labels = manifest.at("class_labels").get<std::vector<std::string>>();
        g.inputs = manifest.at("inputs").get<std::vector<int>>();
        g.outputs = manifest.at("outputs").get<std::vector<int>>();
        for (const json& jn : manifest.at("nodes")) {
            Node n;
            n.id = jn.at("id").get<int>();
            n.kind = op_kind_from_name(jn.at("kind").get<std::string>());
            n.inputs = jn.at("inputs").get<std::vector<int>>();
            for (const auto& [k, v] : jn.at("attrs").items()) n.attrs[k] = attr_from_json(v);
            if (jn.contains("shape")) n.out_shape = jn["shape"].get<std::vector<int>>();
            if (jn.contains("quant")) n.out_quant = quant_from_json(jn["quant"]);
            g.nodes.push_back(std::move(n));
        }
        for (const json& jw : manifest.at("weights")) {
            int id = jw.at("id").get<int>();
            DType dtype = dtype_from_name(jw.at("dtype").get<std::string>());
            auto shape = jw.at("shape").get<std::vector<int>>();
            std::optional<QuantParams> qp;
            if (jw.contains("quant")) qp = quant_from_json(jw["quant"]);
            Tensor t(shape, dtype, qp);
            uint64_t offset = jw.at("offset").get<uint64_t>();
            uint64_t nbytes = jw.at("bytes").get<uint64_t>();
            if (nbytes != t.byte_size() || offset + nbytes > blob_len)
                throw Error(ErrorCode::CorruptManifest,
                            "weight entry for node " + std::to_string(id) +
                                " does not fit the blob");
            read_weight_bytes(t, blob + offset);
            g.weights.emplace(id, std::move(t));
        }
        return g;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptManifest, std::string("manifest field: ") + e.what());
    }
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
    std::vector<uint8_t> out{'E', 'B', 'T', '1'};
    out.push_back(static_cast<uint8_t>(t.dtype()));
    out.push_back(static_cast<uint8_t>(t.rank()));
    for (int d : t.shape()) put_u32(out, static_cast<uint32_t>(d));
    out.push_back(t.quant() ? 1 : 0);
    if (t.quant()) {
        uint32_t s;
        float scale = t.quant()->scale;
        std::memcpy(&s, &scale, 4);
        put_u32(out, s);
        put_u32(out, static_cast<uint32_t>(t.quant()->zero_point));
    }
    append_weight_bytes(out, t);

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error(ErrorCode::Io, "short write to " + path.string());
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    if (bytes.size() < 7 || bytes[0] != 'E' || bytes[1] != 'B' || bytes[2] != 'T' ||
        bytes[3] != '1')
        throw Error(ErrorCode::BadMagic, path.string() + " is not a tensor file");
    size_t pos = 4;
    DType dtype = static_cast<DType>(bytes[pos++]);
    if (dtype != DType::F32 && dtype != DType::F16 && dtype != DType::I8)
        throw Error(ErrorCode::CorruptManifest, "bad dtype byte");
    int rank = bytes[pos++];
    if (bytes.size() < pos + 4u * static_cast<size_t>(rank) + 1)
        throw Error(ErrorCode::CorruptManifest, "tensor header truncated");
    std::vector<int> shape(static_cast<size_t>(rank));
    for (int i = 0; i < rank; ++i) {
        shape[static_cast<size_t>(i)] = static_cast<int>(get_u32(bytes.data() + pos));
        pos += 4;
    }
    std::optional<QuantParams> qp;
    bool has_quant = bytes[pos++] != 0;
    if (has_quant) {
        if (bytes.size() < pos + 8) throw Error(ErrorCode::CorruptManifest, "quant truncated");
        QuantParams q;
        uint32_t s = get_u32(bytes.data() + pos);
        std::memcpy(&q.scale, &s, 4);
        pos += 4;
        q.zero_point = static_cast<int32_t>(get_u32(bytes.data() + pos));
        pos += 4;
        qp = q;
    }
    Tensor t(shape, dtype, qp);
    if (bytes.size() < pos + t.byte_size())
        throw Error(ErrorCode::TruncatedPixels, "tensor data truncated");
    read_weight_bytes(t, bytes.data() + pos);
    return t;
}

}  // namespace edgebin

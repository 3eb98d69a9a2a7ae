#include "edet/model_io.hpp"

#include <cmath>
#include <cstring>

#include "binio.hpp"
#include "edet/errors.hpp"

namespace edet {

namespace {

constexpr char kMagic[4] = {'E', 'D', 'D', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

void write_bn(binio::Writer& w, const std::string& prefix, const BnParams& bn) {
    w.tensor(prefix + ".gamma", bn.gamma);
    w.tensor(prefix + ".beta", bn.beta);
    w.tensor(prefix + ".mean", bn.running_mean);
    w.tensor(prefix + ".var", bn.running_var);
}

std::uint32_t tensor_count(const ModelParams& m) {
    std::uint32_t per_layer = 3 + (has_scalars(m.config.cell) ? 2u : 0u) + 4;
    return static_cast<std::uint32_t>(m.cells.size()) * per_layer + 8;
}

Mat expect_mat(binio::Reader& r, const std::string& want, Eigen::Index rows,
               Eigen::Index cols) {
    auto rec = r.tensor();
    if (rec.name != want)
        throw ModelIoError(ModelIoErrc::corrupt_data,
                           "expected tensor '" + want + "', found '" + rec.name + "'");
    if (rec.dims.size() != 2 || rec.dims[0] != static_cast<std::uint32_t>(rows) ||
        rec.dims[1] != static_cast<std::uint32_t>(cols))
        throw ModelIoError(ModelIoErrc::bad_shape, "tensor '" + want + "' has the wrong shape");
    try {
        return tensor_from_f32(rows, cols, rec.data, true);
    } catch (const TensorError& e) {
        throw ModelIoError(ModelIoErrc::corrupt_data, e.what());
    }
}

Vec expect_vec(binio::Reader& r, const std::string& want, Eigen::Index n) {
    auto rec = r.tensor();
    if (rec.name != want)
        throw ModelIoError(ModelIoErrc::corrupt_data,
                           "expected tensor '" + want + "', found '" + rec.name + "'");
    if (rec.dims.size() != 1 || rec.dims[0] != static_cast<std::uint32_t>(n))
        throw ModelIoError(ModelIoErrc::bad_shape, "tensor '" + want + "' has the wrong shape");
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        float f = rec.data[static_cast<std::size_t>(i)];
        if (!std::isfinite(f))
            throw ModelIoError(ModelIoErrc::corrupt_data,
                               "tensor '" + want + "' holds a non-finite value");
        v[i] = f;
    }
    return v;
}

double expect_scalar(binio::Reader& r, const std::string& want) {
    return expect_vec(r, want, 1)[0];
}

BnParams read_bn(binio::Reader& r, const std::string& prefix, Eigen::Index n) {
    BnParams bn;
    bn.gamma = expect_vec(r, prefix + ".gamma", n);
    bn.beta = expect_vec(r, prefix + ".beta", n);
    bn.running_mean = expect_vec(r, prefix + ".mean", n);
    bn.running_var = expect_vec(r, prefix + ".var", n);
    return bn;
}

} // namespace

std::vector<std::uint8_t> serialize_model(const ModelParams& m) {
    m.validate();
    binio::Writer w;
    w.bytes(kMagic, 4);
    w.u32(kFormatVersion);
    w.u8(static_cast<std::uint8_t>(m.config.cell));
    w.u16(static_cast<std::uint16_t>(m.config.rnn_layers));
    w.u16(static_cast<std::uint16_t>(m.config.hidden));
    w.u16(static_cast<std::uint16_t>(m.config.dense));
    w.u16(static_cast<std::uint16_t>(m.config.input));
    w.f32(static_cast<float>(m.config.threshold));
    w.bytes(m.feature_digest.data(), m.feature_digest.size());
    w.u32(tensor_count(m));
    for (std::size_t l = 0; l < m.cells.size(); ++l) {
        const CellParams& c = m.cells[l];
        std::string p = "cell" + std::to_string(l);
        w.tensor(p + ".W", c.W);
        w.tensor(p + ".U", c.U);
        w.tensor(p + ".b", c.b);
        if (has_scalars(c.kind)) {
            w.tensor_scalar(p + ".s1", c.s1_raw);
            w.tensor_scalar(p + ".s2", c.s2_raw);
        }
        write_bn(w, "bn" + std::to_string(l), m.rnn_bn[l]);
    }
    w.tensor("dense.W", m.dense_w);
    w.tensor("dense.b", m.dense_b);
    write_bn(w, "dense_bn", m.dense_bn);
    w.tensor("out.w", m.out_w);
    w.tensor_scalar("out.b", m.out_b);
    w.crc_trailer();
    return w.take();
}

ModelParams deserialize_model(std::span<const std::uint8_t> bytes) {
    binio::Reader r(bytes);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw ModelIoError(ModelIoErrc::bad_magic, "not a model file");
    std::uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw ModelIoError(ModelIoErrc::bad_version,
                           "unsupported model format version " + std::to_string(version));
    std::uint8_t cell_byte = r.u8();
    if (cell_byte > 3)
        throw ModelIoError(ModelIoErrc::corrupt_data,
                           "unknown cell kind " + std::to_string(cell_byte));
    ModelConfig cfg;
    cfg.cell = static_cast<CellKind>(cell_byte);
    cfg.rnn_layers = r.u16();
    cfg.hidden = r.u16();
    cfg.dense = r.u16();
    cfg.input = r.u16();
    cfg.threshold = r.f32();
    try {
        cfg.validate();
    } catch (const SpecError& e) {
        throw ModelIoError(ModelIoErrc::corrupt_data, e.what());
    }

    ModelParams m;
    m.config = cfg;
    r.bytes(m.feature_digest.data(), m.feature_digest.size());

    std::uint32_t count = r.u32();
    std::uint32_t per_layer = 3 + (has_scalars(cfg.cell) ? 2u : 0u) + 4;
    if (count != static_cast<std::uint32_t>(cfg.rnn_layers) * per_layer + 8)
        throw ModelIoError(ModelIoErrc::bad_shape, "tensor count disagrees with config");

    // Bounds-check the whole record structure and the CRC before decoding
    // any tensor values.
    std::size_t table_pos = 0;
    {
        binio::Reader probe(bytes);
        char skip4[4];
        probe.bytes(skip4, 4);
        probe.u32();
        probe.u8();
        probe.u16();
        probe.u16();
        probe.u16();
        probe.u16();
        probe.f32();
        std::array<std::uint8_t, 32> d;
        probe.bytes(d.data(), d.size());
        probe.u32();
        table_pos = bytes.size() - probe.remaining();
        for (std::uint32_t i = 0; i < count; ++i)
            probe.tensor();
        probe.verify_crc_trailer();
    }

    binio::Reader t(bytes.subspan(table_pos));
    auto wblocks = static_cast<Eigen::Index>(weight_blocks(cfg.cell));
    auto bblocks = static_cast<Eigen::Index>(bias_blocks(cfg.cell));
    for (int l = 0; l < cfg.rnn_layers; ++l) {
        std::string p = "cell" + std::to_string(l);
        CellParams c;
        c.kind = cfg.cell;
        Eigen::Index in = l == 0 ? cfg.input : cfg.hidden;
        c.W = expect_mat(t, p + ".W", wblocks * cfg.hidden, in);
        c.U = expect_mat(t, p + ".U", wblocks * cfg.hidden, cfg.hidden);
        c.b = expect_vec(t, p + ".b", bblocks * cfg.hidden);
        if (has_scalars(cfg.cell)) {
            c.s1_raw = expect_scalar(t, p + ".s1");
            c.s2_raw = expect_scalar(t, p + ".s2");
        }
        m.cells.push_back(std::move(c));
        m.rnn_bn.push_back(read_bn(t, "bn" + std::to_string(l), cfg.hidden));
    }
    m.dense_w = expect_mat(t, "dense.W", cfg.dense, cfg.hidden);
    m.dense_b = expect_vec(t, "dense.b", cfg.dense);
    m.dense_bn = read_bn(t, "dense_bn", cfg.dense);
    m.out_w = expect_vec(t, "out.w", cfg.dense);
    m.out_b = expect_scalar(t, "out.b");

    try {
        m.validate();
    } catch (const ShapeError& e) {
        throw ModelIoError(ModelIoErrc::bad_shape, e.what());
    }
    return m;
}

void save_model(const ModelParams& m, const std::string& path) {
    binio::write_file(path, serialize_model(m));
}

ModelParams load_model(const std::string& path) {
    return deserialize_model(binio::read_file(path));
}

std::size_t serialized_size_bytes(const ModelParams& m) { return serialize_model(m).size(); }

} // namespace edet

#include "ipcloak/pipeline.hpp"

#include <stdexcept>

namespace ipcloak {

namespace {

PipelineAction drop(DropReason reason) {
    PipelineAction act;
    act.kind = PipelineAction::Kind::Drop;
    act.reason = reason;
    return act;
}

PipelineAction pass(const PacketView& pkt) {
    PipelineAction act;
    act.kind = PipelineAction::Kind::PassThrough;
    act.packet = pkt;
    return act;
}

uint16_t pad_prefix16(uint64_t pad, unsigned pad_bits) {
    return uint16_t(pad >> (pad_bits - 16));
}

PipelineAction finish(TranslateResult&& res, PipelineAction::Kind kind) {
    if (auto* reason = std::get_if<DropReason>(&res))
        return drop(*reason);
    PipelineAction act;
    act.kind = kind;
    act.packet = std::move(std::get<PacketView>(res));
    return act;
}

} // namespace

void validate_config(const PipelineConfig& cfg) {
    if (!cfg.cipher)
        throw std::invalid_argument("pipeline config has no cipher parameters");
    if (cfg.cipher->block_bits != cfg.layout.cipher_bits())
        throw std::invalid_argument("cipher width does not match address layout");
    if (cfg.port_obfuscation && cfg.layout.pad_bits < 16)
        throw std::invalid_argument("port obfuscation needs at least 16 pad bits");
    if (cfg.internal_prefix.len > 32)
        throw std::invalid_argument("internal prefix length must be at most 32");
}

PipelineAction process_outbound(const PacketView& pkt, RotationWindow& window,
                                const ServerMap& map, const PipelineConfig& cfg,
                                EntropySource& ent) {
    if (pkt.net != NetForm::V4)
        return drop(DropReason::Malformed);

    auto it = map.ip4_to_6.find(pkt.dst4);
    if (it == map.ip4_to_6.end())
        return cfg.strict_unmapped ? drop(DropReason::UnmappedDst) : pass(pkt);

    if (pkt.is_fragment())
        return drop(DropReason::Fragment);
    if (!pkt.is_udp && cfg.port_obfuscation && cfg.drop_non_udp)
        return drop(DropReason::NonUdp);

    auto ks = window.current();
    unsigned l = cfg.layout.pad_bits;
    uint64_t pad = ent.bits(l);
    uint64_t m = (uint64_t(pkt.src4) << l) | pad;
    uint64_t c = encrypt(*cfg.cipher, ks->k0, ks->k1, ks->k2, m);

    PacketView staged = pkt;
    if (cfg.port_obfuscation && pkt.is_udp)
        staged.sport ^= otp_for(*ks, pad_prefix16(pad, l));

    Ipv6Address src6 = encode_address(cfg.layout, ks->version, c);
    return finish(translate_4to6(staged, src6, it->second),
                  PipelineAction::Kind::ForwardV6);
}

PipelineAction process_inbound(const PacketView& pkt, RotationWindow& window,
                               const ServerMap& map, const PipelineConfig& cfg) {
    if (pkt.net != NetForm::V6)
        return drop(DropReason::Malformed);

    auto dec = decode_address(cfg.layout, pkt.dst6);
    if (!dec)
        return cfg.strict_unmapped ? drop(DropReason::ForeignPrefix) : pass(pkt);

    if (pkt.has_ext_headers)
        return drop(DropReason::UnsupportedExtension);

    auto ks = window.lookup(dec->version);
    if (!ks)
        return drop(DropReason::Expired);

    unsigned l = cfg.layout.pad_bits;
    uint64_t m = decrypt(*cfg.cipher, ks->k0, ks->k1, ks->k2, dec->ciphertext);
    auto addr4 = uint32_t(m >> l);
    uint64_t pad = l == 0 ? 0 : m & block_mask(l);

    if (!cfg.internal_prefix.contains(addr4))
        return drop(DropReason::AddrValidation);

    PacketView staged = pkt;
    if (cfg.port_obfuscation && pkt.is_udp)
        staged.dport ^= otp_for(*ks, pad_prefix16(pad, l));

    auto src = map.ip6_to_4.find(pkt.src6);
    if (src == map.ip6_to_4.end())
        return drop(DropReason::UnmappedSrc);

    PipelineAction act = finish(translate_6to4(staged, src->second, addr4),
                                PipelineAction::Kind::ForwardV4);
    act.reserved_meta_seen = dec->reserved_nonzero;
    return act;
}

} // namespace ipcloak

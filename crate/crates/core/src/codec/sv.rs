use std::fmt::Write as _;

use super::ber::{self, expect_tlv};
use super::ether::{self, Header, MacAddr, RawFrame, VlanTag, ETHERTYPE_SV};
use super::CodecError;

/// One scaled-integer value is 1 mA.
pub const SV_CURRENT_UNIT_A: f64 = 0.001;
/// One scaled-integer value is 10 mV.
pub const SV_VOLTAGE_UNIT_V: f64 = 0.01;

const NAMES: [&str; 8] = ["Ia", "Ib", "Ic", "In", "Va", "Vb", "Vc", "Vn"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct SvEntry {
    pub value: i32,
    pub quality: u32,
}

/// One ASDU of a 9-2LE stream: Ia, Ib, Ic, In, Va, Vb, Vc, Vn.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SvFrame {
    pub dst: MacAddr,
    pub src: MacAddr,
    pub vlan: Option<VlanTag>,
    pub appid: u16,
    pub sv_id: String,
    pub smp_cnt: u16,
    pub conf_rev: u32,
    pub smp_synch: u8,
    pub dataset: [SvEntry; 8],
}

impl SvFrame {
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "protocol: SV");
        let _ = writeln!(s, "dst: {}", self.dst);
        let _ = writeln!(s, "src: {}", self.src);
        if let Some(v) = self.vlan {
            let _ = writeln!(s, "vlan: priority {} vid {}", v.priority, v.vid);
        }
        let _ = writeln!(s, "appid: 0x{:04X}", self.appid);
        let _ = writeln!(s, "svID: {}", self.sv_id);
        let _ = writeln!(s, "smpCnt: {}", self.smp_cnt);
        let _ = writeln!(s, "confRev: {}", self.conf_rev);
        let _ = writeln!(s, "smpSynch: {}", self.smp_synch);
        for (name, e) in NAMES.iter().zip(&self.dataset) {
            let _ = writeln!(s, "{name}: {} q=0x{:08X}", e.value, e.quality);
        }
        s
    }
}

pub fn encode_sv(f: &SvFrame) -> Result<RawFrame, CodecError> {
    let mut seq = Vec::with_capacity(64);
    for e in &f.dataset {
        seq.extend_from_slice(&e.value.to_be_bytes());
        seq.extend_from_slice(&e.quality.to_be_bytes());
    }
    let mut asdu = Vec::with_capacity(100);
    ber::push_tlv(&mut asdu, 0x80, f.sv_id.as_bytes())?;
    ber::push_tlv(&mut asdu, 0x82, &f.smp_cnt.to_be_bytes())?;
    ber::push_tlv(&mut asdu, 0x83, &f.conf_rev.to_be_bytes())?;
    ber::push_tlv(&mut asdu, 0x85, &[f.smp_synch])?;
    ber::push_tlv(&mut asdu, 0x87, &seq)?;
    let asdu = ber::encode_tlv(0x30, &asdu)?;
    let mut body = ber::encode_tlv(0x80, &[1])?;
    ber::push_tlv(&mut body, 0xA2, &asdu)?;
    let apdu = ber::encode_tlv(0x60, &body)?;
    let h = Header {
        dst: f.dst,
        src: f.src,
        vlan: f.vlan,
        appid: f.appid,
    };
    Ok(RawFrame::new(ether::write_frame(&h, ETHERTYPE_SV, &apdu)?))
}

pub fn decode_sv(raw: &RawFrame) -> Result<SvFrame, CodecError> {
    let (h, declared, rest) = ether::read_frame(&raw.bytes, ETHERTYPE_SV)?;
    let (frame, used) = decode_apdu(rest, h).map_err(|e| match e {
        CodecError::Truncated(_) => CodecError::Truncated("APDU"),
        other => other,
    })?;
    ether::check_length(declared, used, rest.len())?;
    Ok(frame)
}

fn decode_apdu(bytes: &[u8], h: Header) -> Result<(SvFrame, usize), CodecError> {
    let (tag, body, used) = ber::decode_tlv(bytes)?;
    if tag != 0x60 {
        return Err(CodecError::UnexpectedTag { expected: 0x60, found: tag });
    }
    let mut body = body;
    let no_asdu = expect_tlv(&mut body, 0x80)?;
    if no_asdu != [1] {
        return Err(CodecError::InvalidValue("noASDU (only 1 supported)"));
    }
    let mut seq = expect_tlv(&mut body, 0xA2)?;
    if !body.is_empty() {
        return Err(CodecError::TrailingBytes(body.len()));
    }
    let mut asdu = expect_tlv(&mut seq, 0x30)?;
    if !seq.is_empty() {
        return Err(CodecError::TrailingBytes(seq.len()));
    }
    let sv_id = ber::decode_string(expect_tlv(&mut asdu, 0x80)?)?;
    let smp_cnt: [u8; 2] = expect_tlv(&mut asdu, 0x82)?
        .try_into()
        .map_err(|_| CodecError::InvalidValue("smpCnt length"))?;
    let conf_rev: [u8; 4] = expect_tlv(&mut asdu, 0x83)?
        .try_into()
        .map_err(|_| CodecError::InvalidValue("confRev length"))?;
    let smp_synch = match expect_tlv(&mut asdu, 0x85)? {
        [b] => *b,
        _ => return Err(CodecError::InvalidValue("smpSynch length")),
    };
    let data = expect_tlv(&mut asdu, 0x87)?;
    if data.len() != 64 {
        return Err(CodecError::DatasetLength(data.len()));
    }
    if !asdu.is_empty() {
        return Err(CodecError::TrailingBytes(asdu.len()));
    }
    let mut dataset = [SvEntry::default(); 8];
    for (e, chunk) in dataset.iter_mut().zip(data.chunks_exact(8)) {
        e.value = i32::from_be_bytes(chunk[0..4].try_into().unwrap());
        e.quality = u32::from_be_bytes(chunk[4..8].try_into().unwrap());
    }
    Ok((
        SvFrame {
            dst: h.dst,
            src: h.src,
            vlan: h.vlan,
            appid: h.appid,
            sv_id,
            smp_cnt: u16::from_be_bytes(smp_cnt),
            conf_rev: u32::from_be_bytes(conf_rev),
            smp_synch,
            dataset,
        },
        used,
    ))
}

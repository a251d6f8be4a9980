//! Seeded discrete-event simulation of contention and deterministic links.
//!
//! Contention links run unslotted CSMA/CA per device: on taking a packet the
//! device sets `NB = 0, BE = be_min`, backs off a uniform number of slots,
//! then senses the channel for `cca_duration`. A busy channel raises NB and
//! BE (BE capped at `be_max`) and re-draws; more than `max_backoffs` busy
//! CCAs drop the packet. A clear channel starts the transmission. Any overlap
//! of two data transmissions destroys both. With acknowledgements on, a
//! sender reserves the channel for the turnaround and ACK after its frame
//! (ACKs never collide); a collided frame times out after the same window
//! and is retried with `NB = 0` and BE raised by one, up to `max_retries`.
//! With acknowledgements off every transmitted frame counts as delivered,
//! collided or not.
//!
//! A packet's [`DelayBreakdown`] carries its cumulative backoff time and the
//! airtimes and inter-frame space of its final attempt. Its link delay is the
//! full sojourn from arrival to the end of the inter-frame space, which also
//! covers queueing, CCA time and failed attempts.
//!
//! Events are ordered by `(time, kind, device, packet)`, so a run is a pure
//! function of its inputs and seed.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use serde::{Deserialize, Serialize};

use crate::csma_analytics::{self, DelayBreakdown};
use crate::error::Error;
use crate::model::{
    ContentionConfig, CsmaParams, MacKind, PathSpec, Profiles, TechnologyProfile, TrafficSpec,
};
use crate::pathcomposer::PathDelayReport;
use crate::rng::{derive_seed, Stream};
use crate::Seconds;

/// Packet ids at or above this value belong to background traffic that
/// shares a link with the path but does not continue along it.
pub const BACKGROUND_PACKET: u64 = 1 << 63;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Arrival,
    BackoffExpiry,
    CcaResult,
    TxEnd,
    AckTimeout,
    IfsEnd,
}

#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub time: Seconds,
    pub kind: EventKind,
    pub device: u32,
    pub packet: u64,
}

impl Event {
    fn key(&self) -> (EventKind, u32, u64) {
        (self.kind, self.device, self.packet)
    }
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then_with(|| self.key().cmp(&other.key()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub time: Seconds,
    pub packet: u64,
    pub payload: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSample {
    pub packet: u64,
    pub device: u32,
    pub arrival: Seconds,
    pub departure: Seconds,
    /// Time spent on the link. Equals `departure - arrival` up to rounding;
    /// deterministic links compute it from waiting and service time so an
    /// unqueued packet sees exactly the analytic delay.
    pub sojourn: Seconds,
    pub breakdown: DelayBreakdown,
    pub retries: u32,
    /// The delivering transmission collided (only possible without ACKs).
    pub collided: bool,
}

impl LinkSample {
    pub fn delay(&self) -> Seconds {
        self.sojourn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Oversize,
    ChannelAccessFailure,
    RetryLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropRecord {
    pub packet: u64,
    pub device: u32,
    pub time: Seconds,
    pub reason: DropReason,
    /// Backoff time accumulated before the drop.
    pub backoff: Seconds,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkSampleSet {
    /// Delivered packets in completion order.
    pub samples: Vec<LinkSample>,
    pub drops: Vec<DropRecord>,
    /// Data frames destroyed by overlap.
    pub collisions: u64,
    /// Retry count of delivered packets -> number of packets.
    pub retries_histogram: BTreeMap<u32, u64>,
    pub offered: u64,
}

impl LinkSampleSet {
    pub fn delivered(&self) -> u64 {
        self.samples.len() as u64
    }

    pub fn dropped(&self) -> u64 {
        self.drops.len() as u64
    }

    pub fn dropped_for(&self, reason: DropReason) -> u64 {
        self.drops.iter().filter(|d| d.reason == reason).count() as u64
    }

    /// Mean cumulative backoff over every offered packet, delivered or not.
    pub fn mean_offered_backoff(&self) -> Option<Seconds> {
        let n = self.samples.len() + self.drops.len();
        if n == 0 {
            return None;
        }
        let sum: f64 = self.samples.iter().map(|s| s.breakdown.t_bo).sum::<f64>()
            + self.drops.iter().map(|d| d.backoff).sum::<f64>();
        Some(sum / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathPacket {
    pub packet: u64,
    pub report: PathDelayReport,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PathSampleSet {
    /// Packets delivered over every link, ordered by packet id.
    pub per_packet: Vec<PathPacket>,
    pub per_link: Vec<LinkSampleSet>,
}

// ---------------------------------------------------------------------------
// Contention links
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct InFlight {
    arrival: Arrival,
    nb: u32,
    be: u8,
    retries: u32,
    backoff: Seconds,
    cca_start: Seconds,
    collided: bool,
}

struct Device {
    arrivals: Vec<Arrival>,
    next_arrival: usize,
    queue: VecDeque<Arrival>,
    current: Option<InFlight>,
    stream: Stream,
}

#[derive(Debug, Clone, Copy)]
struct Transmission {
    device: u32,
    start: Seconds,
    data_end: Seconds,
    reserve_end: Seconds,
    collided: bool,
}

struct CsmaSim<'a> {
    params: &'a CsmaParams,
    profile: &'a TechnologyProfile,
    t_ack: Seconds,
    devices: Vec<Device>,
    events: BinaryHeap<Reverse<Event>>,
    channel: Vec<Transmission>,
    out: LinkSampleSet,
}

impl CsmaSim<'_> {
    fn schedule(&mut self, time: Seconds, kind: EventKind, device: u32, packet: u64) {
        self.events.push(Reverse(Event {
            time,
            kind,
            device,
            packet,
        }));
    }

    fn schedule_next_arrival(&mut self, d: u32) {
        let dev = &mut self.devices[d as usize];
        if let Some(a) = dev.arrivals.get(dev.next_arrival).copied() {
            dev.next_arrival += 1;
            self.schedule(a.time, EventKind::Arrival, d, a.packet);
        }
    }

    fn drop_current(&mut self, d: u32, now: Seconds, reason: DropReason) {
        let f = self.devices[d as usize]
            .current
            .take()
            .expect("dropping an in-flight packet");
        self.out.drops.push(DropRecord {
            packet: f.arrival.packet,
            device: d,
            time: now,
            reason,
            backoff: f.backoff,
        });
        self.start_next(d, now);
    }

    fn start_next(&mut self, d: u32, now: Seconds) {
        let dev = &mut self.devices[d as usize];
        debug_assert!(dev.current.is_none());
        if let Some(arrival) = dev.queue.pop_front() {
            dev.current = Some(InFlight {
                arrival,
                nb: 0,
                be: self.params.be_min,
                retries: 0,
                backoff: 0.0,
                cca_start: now,
                collided: false,
            });
            self.begin_backoff(d, now);
        }
    }

    fn begin_backoff(&mut self, d: u32, now: Seconds) {
        let slot = self.params.slot_duration;
        let dev = &mut self.devices[d as usize];
        let f = dev.current.as_mut().expect("backoff without a packet");
        let slots = dev.stream.window(f.be);
        let wait = slots as f64 * slot;
        f.backoff += wait;
        let packet = f.arrival.packet;
        self.schedule(now + wait, EventKind::BackoffExpiry, d, packet);
    }

    fn channel_busy(&self, d: u32, from: Seconds, to: Seconds) -> bool {
        self.channel
            .iter()
            .any(|t| t.device != d && t.start < to && t.reserve_end > from)
    }

    fn start_transmission(&mut self, d: u32, now: Seconds) {
        let f = self.devices[d as usize].current.expect("transmitting a packet");
        let data_end = now + csma_analytics::t_data(self.profile, f.arrival.payload);
        let reserve_end = if self.params.ack_enabled {
            data_end + self.params.turnaround + self.t_ack
        } else {
            data_end
        };
        let horizon = now - self.params.cca_duration;
        self.channel.retain(|t| t.reserve_end >= horizon);
        let mut collided = false;
        for other in &mut self.channel {
            if other.start <= now && now < other.data_end {
                collided = true;
                if !other.collided {
                    other.collided = true;
                    self.out.collisions += 1;
                }
            }
        }
        if collided {
            self.out.collisions += 1;
        }
        self.channel.push(Transmission {
            device: d,
            start: now,
            data_end,
            reserve_end,
            collided,
        });
        self.schedule(data_end, EventKind::TxEnd, d, f.arrival.packet);
    }

    fn handle(&mut self, ev: Event) {
        let now = ev.time;
        let d = ev.device;
        match ev.kind {
            EventKind::Arrival => {
                let dev = &mut self.devices[d as usize];
                let arrival = dev.arrivals[dev.next_arrival - 1];
                self.schedule_next_arrival(d);
                self.out.offered += 1;
                if self.profile.drops_payload(arrival.payload) {
                    self.out.drops.push(DropRecord {
                        packet: arrival.packet,
                        device: d,
                        time: now,
                        reason: DropReason::Oversize,
                        backoff: 0.0,
                    });
                    return;
                }
                let dev = &mut self.devices[d as usize];
                dev.queue.push_back(arrival);
                if dev.current.is_none() {
                    self.start_next(d, now);
                }
            }
            EventKind::BackoffExpiry => {
                let f = self.devices[d as usize].current.as_mut().expect("in flight");
                f.cca_start = now;
                self.schedule(now + self.params.cca_duration, EventKind::CcaResult, d, ev.packet);
            }
            EventKind::CcaResult => {
                let cca_start = self.devices[d as usize].current.expect("in flight").cca_start;
                if self.channel_busy(d, cca_start, now) {
                    let be_max = self.params.be_max;
                    let f = self.devices[d as usize].current.as_mut().expect("in flight");
                    f.nb += 1;
                    f.be = (f.be + 1).min(be_max);
                    if f.nb > self.params.max_backoffs {
                        self.drop_current(d, now, DropReason::ChannelAccessFailure);
                    } else {
                        self.begin_backoff(d, now);
                    }
                } else {
                    self.start_transmission(d, now);
                }
            }
            EventKind::TxEnd => {
                let collided = self
                    .channel
                    .iter()
                    .find(|t| t.device == d && t.data_end == now)
                    .map(|t| t.collided)
                    .expect("transmission on record");
                let f = self.devices[d as usize].current.as_mut().expect("in flight");
                f.collided = collided;
                let payload = f.arrival.payload;
                let ifs = csma_analytics::ifs(self.profile, self.params, payload);
                if !self.params.ack_enabled {
                    self.schedule(now + ifs, EventKind::IfsEnd, d, ev.packet);
                } else if collided {
                    let wait = self.params.turnaround + self.t_ack;
                    self.schedule(now + wait, EventKind::AckTimeout, d, ev.packet);
                } else {
                    let done = now + self.params.turnaround + self.t_ack + ifs;
                    self.schedule(done, EventKind::IfsEnd, d, ev.packet);
                }
            }
            EventKind::AckTimeout => {
                let be_max = self.params.be_max;
                let f = self.devices[d as usize].current.as_mut().expect("in flight");
                f.retries += 1;
                if f.retries > self.params.max_retries {
                    self.drop_current(d, now, DropReason::RetryLimit);
                } else {
                    f.nb = 0;
                    f.be = (f.be + 1).min(be_max);
                    self.begin_backoff(d, now);
                }
            }
            EventKind::IfsEnd => {
                let f = self.devices[d as usize].current.take().expect("in flight");
                let payload = f.arrival.payload;
                let (ta, ack) = if self.params.ack_enabled {
                    (self.params.turnaround, self.t_ack)
                } else {
                    (0.0, 0.0)
                };
                let breakdown = DelayBreakdown::new(
                    f.backoff,
                    csma_analytics::t_data(self.profile, payload),
                    ta,
                    ack,
                    csma_analytics::ifs(self.profile, self.params, payload),
                );
                self.out.samples.push(LinkSample {
                    packet: f.arrival.packet,
                    device: d,
                    arrival: f.arrival.time,
                    departure: now,
                    sojourn: now - f.arrival.time,
                    breakdown,
                    retries: f.retries,
                    collided: f.collided,
                });
                *self.out.retries_histogram.entry(f.retries).or_insert(0) += 1;
                self.start_next(d, now);
            }
        }
    }
}

fn require_kind(profile: &TechnologyProfile, expected: MacKind) -> Result<(), Error> {
    if profile.mac_kind() == expected {
        Ok(())
    } else {
        Err(Error::WrongKind {
            profile: profile.id.clone(),
            expected,
            actual: profile.mac_kind(),
        })
    }
}

/// Simulate a contention link where device `d` offers `arrivals[d]` (each
/// list in time order). Device `d` draws from random stream `d` of `seed`.
pub fn simulate_csma_arrivals(
    profile: &TechnologyProfile,
    arrivals: Vec<Vec<Arrival>>,
    seed: u64,
) -> Result<LinkSampleSet, Error> {
    require_kind(profile, MacKind::Contention)?;
    let params = profile.csma().expect("contention profile");
    let devices = arrivals
        .into_iter()
        .enumerate()
        .map(|(d, mut list)| {
            list.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.packet.cmp(&b.packet)));
            Device {
                arrivals: list,
                next_arrival: 0,
                queue: VecDeque::new(),
                current: None,
                stream: Stream::child(seed, d as u64),
            }
        })
        .collect::<Vec<_>>();
    let mut sim = CsmaSim {
        params,
        profile,
        t_ack: csma_analytics::t_ack(profile),
        devices,
        events: BinaryHeap::new(),
        channel: Vec::new(),
        out: LinkSampleSet::default(),
    };
    for d in 0..sim.devices.len() as u32 {
        sim.schedule_next_arrival(d);
    }
    while let Some(Reverse(ev)) = sim.events.pop() {
        sim.handle(ev);
    }
    Ok(sim.out)
}

/// Periodic arrivals: `count` packets at `0, inter_arrival, 2 * inter_arrival, ...`.
/// Packet `k` of device `d` out of `devices` gets id `base + k * devices + d`.
pub fn periodic_arrivals(traffic: &TrafficSpec, device: u32, devices: u32, base: u64) -> Vec<Arrival> {
    (0..u64::from(traffic.packet_count))
        .map(|k| Arrival {
            time: k as f64 * traffic.inter_arrival,
            packet: base + k * u64::from(devices) + u64::from(device),
            payload: traffic.payload,
        })
        .collect()
}

/// Simulate `contention.num_end_devices` devices that each offer
/// `traffic.packet_count` periodic packets, all starting at time zero.
pub fn simulate_csma_link(
    profile: &TechnologyProfile,
    traffic: &TrafficSpec,
    contention: ContentionConfig,
    seed: u64,
) -> Result<LinkSampleSet, Error> {
    require_kind(profile, MacKind::Contention)?;
    let n = contention.num_end_devices.max(1);
    let arrivals = (0..n).map(|d| periodic_arrivals(traffic, d, n, 0)).collect();
    simulate_csma_arrivals(profile, arrivals, seed)
}

// ---------------------------------------------------------------------------
// Deterministic links
// ---------------------------------------------------------------------------

/// FIFO single-server link: serialization occupies the link, processing and
/// propagation follow without blocking later packets. The link is fully
/// deterministic, so no seed is taken.
pub fn simulate_deterministic_link(
    profile: &TechnologyProfile,
    arrivals: &[Arrival],
) -> Result<LinkSampleSet, Error> {
    require_kind(profile, MacKind::Deterministic)?;
    let params = profile.deterministic().expect("deterministic profile");
    let mut order: Vec<Arrival> = arrivals.to_vec();
    order.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.packet.cmp(&b.packet)));

    let mut out = LinkSampleSet {
        offered: order.len() as u64,
        ..LinkSampleSet::default()
    };
    let mut free_at = f64::NEG_INFINITY;
    let after = params.processing_delay + params.propagation_delay;
    for a in order {
        if profile.drops_payload(a.payload) {
            out.drops.push(DropRecord {
                packet: a.packet,
                device: 0,
                time: a.time,
                reason: DropReason::Oversize,
                backoff: 0.0,
            });
            continue;
        }
        let wait = (free_at - a.time).max(0.0);
        let serialization = csma_analytics::t_data(profile, a.payload);
        free_at = a.time.max(free_at) + serialization;
        out.samples.push(LinkSample {
            packet: a.packet,
            device: 0,
            arrival: a.time,
            departure: free_at + after,
            sojourn: wait + serialization + after,
            breakdown: DelayBreakdown::new(0.0, serialization, 0.0, 0.0, after),
            retries: 0,
            collided: false,
        });
        *out.retries_histogram.entry(0).or_insert(0) += 1;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

fn profile_for<'p>(profiles: &'p Profiles, id: &str) -> Result<&'p TechnologyProfile, Error> {
    profiles
        .get(id)
        .ok_or_else(|| Error::UnknownProfile(id.into()))
}

/// Push `traffic` through the links of `path` store-and-forward.
///
/// On the first link every contending device is a body sensor whose packets
/// travel the path. On later contention links device 0 forwards the path's
/// packets and the other devices offer periodic background traffic that ends
/// at that link. Link `i` draws from random stream `i` of `seed`.
pub fn simulate_path(
    path: &PathSpec,
    profiles: &Profiles,
    traffic: &TrafficSpec,
    seed: u64,
) -> Result<PathSampleSet, Error> {
    let mut delays: BTreeMap<u64, [Seconds; 3]> = BTreeMap::new();
    let mut per_link = Vec::with_capacity(path.links.len());
    let mut forwarded: Vec<Arrival> = Vec::new();

    for (pos, link) in path.links.iter().enumerate() {
        let profile = profile_for(profiles, &link.profile_id)?;
        let link_seed = derive_seed(seed, u64::from(link.index));
        let devices = link.contention.map_or(1, |c| c.num_end_devices.max(1));
        let set = match profile.mac_kind() {
            MacKind::Contention if pos == 0 => simulate_csma_arrivals(
                profile,
                (0..devices)
                    .map(|d| periodic_arrivals(traffic, d, devices, 0))
                    .collect(),
                link_seed,
            )?,
            MacKind::Contention => {
                let mut lists = Vec::with_capacity(devices as usize);
                lists.push(forwarded.clone());
                for d in 1..devices {
                    lists.push(periodic_arrivals(traffic, d, devices, BACKGROUND_PACKET));
                }
                simulate_csma_arrivals(profile, lists, link_seed)?
            }
            MacKind::Deterministic if pos == 0 => {
                simulate_deterministic_link(profile, &periodic_arrivals(traffic, 0, 1, 0))?
            }
            MacKind::Deterministic => simulate_deterministic_link(profile, &forwarded)?,
        };

        let mut next: BTreeMap<u64, [Seconds; 3]> = BTreeMap::new();
        let mut survivors: BTreeSet<u64> = BTreeSet::new();
        forwarded.clear();
        for s in &set.samples {
            if s.packet >= BACKGROUND_PACKET {
                continue;
            }
            let mut row = if pos == 0 {
                [0.0; 3]
            } else {
                match delays.get(&s.packet) {
                    Some(row) => *row,
                    None => continue,
                }
            };
            row[pos] = s.delay();
            next.insert(s.packet, row);
            survivors.insert(s.packet);
            forwarded.push(Arrival {
                time: s.departure,
                packet: s.packet,
                payload: traffic.payload,
            });
        }
        forwarded.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.packet.cmp(&b.packet)));
        delays = next;
        per_link.push(set);
    }

    let hops = path.links.len();
    let per_packet = delays
        .into_iter()
        .map(|(packet, row)| PathPacket {
            packet,
            report: PathDelayReport::from_hops(&row[..hops.min(3)]),
        })
        .collect();
    Ok(PathSampleSet {
        per_packet,
        per_link,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_profiles, LinkSpec, MacParams};
    use alloc::vec;

    fn traffic(payload: u32, inter_arrival: f64, packet_count: u32) -> TrafficSpec {
        TrafficSpec {
            payload,
            inter_arrival,
            packet_count,
        }
    }

    #[test]
    fn event_order_is_total() {
        let a = Event { time: 1.0, kind: EventKind::TxEnd, device: 0, packet: 0 };
        let b = Event { time: 1.0, kind: EventKind::Arrival, device: 5, packet: 9 };
        let c = Event { time: 0.5, kind: EventKind::IfsEnd, device: 9, packet: 9 };
        let mut v = [a, b, c];
        v.sort();
        assert_eq!(v.iter().map(|e| e.kind).collect::<Vec<_>>(), [
            EventKind::IfsEnd,
            EventKind::Arrival,
            EventKind::TxEnd
        ]);
    }

    #[test]
    fn single_device_never_collides() {
        let p = builtin_profiles()["zigbee"].clone();
        let set = simulate_csma_link(&p, &traffic(100, 0.04, 2000), ContentionConfig { num_end_devices: 1 }, 3)
            .unwrap();
        assert_eq!(set.collisions, 0);
        assert_eq!(set.dropped(), 0);
        assert_eq!(set.delivered(), 2000);
        assert_eq!(set.retries_histogram.get(&0), Some(&2000));
    }

    #[test]
    fn deterministic_profile_is_rejected_by_csma() {
        let p = builtin_profiles()["umts"].clone();
        let err = simulate_csma_link(&p, &traffic(1, 1.0, 1), ContentionConfig { num_end_devices: 1 }, 0);
        assert!(matches!(err, Err(Error::WrongKind { .. })));
        let z = builtin_profiles()["zigbee"].clone();
        assert!(matches!(simulate_deterministic_link(&z, &[]), Err(Error::WrongKind { .. })));
    }

    #[test]
    fn deterministic_single_arrival() {
        let u = builtin_profiles()["umts"].clone();
        let set = simulate_deterministic_link(&u, &[Arrival { time: 0.0, packet: 0, payload: 0 }]).unwrap();
        assert_eq!(set.samples[0].delay(), 0.002);
    }

    #[test]
    fn deterministic_fifo_queueing() {
        let mut w = builtin_profiles()["wimax"].clone();
        w.data_rate = 1000.0;
        let a = [
            Arrival { time: 0.0, packet: 1, payload: 125 },
            Arrival { time: 0.0, packet: 0, payload: 125 },
        ];
        let set = simulate_deterministic_link(&w, &a).unwrap();
        assert_eq!(set.samples[0].packet, 0);
        assert_eq!(set.samples[0].delay(), 1.0);
        assert_eq!(set.samples[1].delay(), 2.0);
    }

    #[test]
    fn oversize_frames_are_dropped() {
        let mut w = builtin_profiles()["wimax"].clone();
        w.buffer_capacity = Some(25_600);
        w.oversize_policy = crate::model::OversizePolicy::Drop;
        let a = [Arrival { time: 0.0, packet: 0, payload: 3750 }];
        let set = simulate_deterministic_link(&w, &a).unwrap();
        assert_eq!(set.dropped_for(DropReason::Oversize), 1);
        assert_eq!(set.delivered(), 0);
    }

    #[test]
    fn collisions_without_ack_still_deliver() {
        let mut p = builtin_profiles()["zigbee"].clone();
        if let MacParams::Contention(c) = &mut p.mac {
            c.ack_enabled = false;
            c.be_min = 0;
            c.be_max = 0;
        }
        // window {0}: both devices transmit at once every period
        let set = simulate_csma_link(&p, &traffic(20, 1.0, 10), ContentionConfig { num_end_devices: 2 }, 1)
            .unwrap();
        assert_eq!(set.delivered(), 20);
        assert_eq!(set.collisions, 20);
        assert!(set.samples.iter().all(|s| s.collided));
    }

    #[test]
    fn collisions_with_ack_exhaust_retries() {
        let mut p = builtin_profiles()["zigbee"].clone();
        if let MacParams::Contention(c) = &mut p.mac {
            c.be_min = 0;
            c.be_max = 0;
            c.max_retries = 2;
        }
        let set = simulate_csma_link(&p, &traffic(20, 1.0, 5), ContentionConfig { num_end_devices: 2 }, 1)
            .unwrap();
        assert_eq!(set.delivered(), 0);
        assert_eq!(set.dropped_for(DropReason::RetryLimit), 10);
        assert_eq!(set.collisions, 2 * 3 * 5);
    }

    #[test]
    fn path_of_deterministic_links_is_exact() {
        let profiles = builtin_profiles();
        let path = PathSpec {
            id: "d".into(),
            links: vec![
                LinkSpec { index: 1, profile_id: "umts".into(), contention: None },
                LinkSpec { index: 2, profile_id: "wimax".into(), contention: None },
                LinkSpec { index: 3, profile_id: "ipcloud".into(), contention: None },
            ],
        };
        let t = traffic(1024, 0.04, 50);
        let set = simulate_path(&path, &profiles, &t, 9).unwrap();
        assert_eq!(set.per_packet.len(), 50);
        let expect: Vec<f64> = ["umts", "wimax", "ipcloud"]
            .iter()
            .map(|id| csma_analytics::deterministic_link_delay(&profiles[*id], 1024).unwrap().total)
            .collect();
        for p in &set.per_packet {
            let r = p.report;
            assert_eq!(r.d_total, r.d1 + r.d2 + r.d3);
            for (got, want) in [r.d1, r.d2, r.d3].iter().zip(&expect) {
                assert_eq!(got, want);
            }
        }
    }
}

pub mod harness;
pub mod klcast_sb;
pub mod klcast_sf;
pub mod mbrb;
pub mod netsim;
pub mod params;

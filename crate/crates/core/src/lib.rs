pub mod certificate;
pub mod driver;
pub mod io;
pub mod poly;
pub mod report;
pub mod sos;

use std::io::Write;

use super::IngestError;
use crate::trip::{CleanTrip, Location, VehicleClass};

const TS: &str = "%Y-%m-%d %H:%M:%S";

fn export_err(i: usize, msg: &str) -> IngestError {
    IngestError::Export(format!("trip {i}: {msg}"))
}

/// Writes docked trips with the [`DockedColumns::standard`](super::DockedColumns::standard) header.
pub fn write_docked<W: Write>(trips: &[CleanTrip], sink: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "start_time",
        "end_time",
        "start_station_id",
        "end_station_id",
        "user_type",
        "vehicle_id",
    ])?;
    for (i, t) in trips.iter().enumerate() {
        let (Location::Station(from), Location::Station(to)) = (&t.start_loc, &t.end_loc) else {
            return Err(export_err(i, "docked trips need station endpoints"));
        };
        let label = t
            .label
            .ok_or_else(|| export_err(i, "docked trips need a user type"))?;
        w.write_record([
            t.start_instant.format(TS).to_string(),
            t.end_instant().format(TS).to_string(),
            from.clone(),
            to.clone(),
            label.to_string(),
            String::new(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Writes dockless trips with the [`DocklessColumns::standard`](super::DocklessColumns::standard) header.
pub fn write_dockless<W: Write>(trips: &[CleanTrip], sink: W) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record([
        "start_time",
        "end_time",
        "start_lat",
        "start_lon",
        "end_lat",
        "end_lon",
        "operator",
        "vehicle_class",
        "cancelled",
    ])?;
    for (i, t) in trips.iter().enumerate() {
        let (Location::Point(a), Location::Point(b)) = (&t.start_loc, &t.end_loc) else {
            return Err(export_err(i, "dockless trips need point endpoints"));
        };
        let class = match t.vehicle_class {
            VehicleClass::DocklessBike => "bike",
            VehicleClass::Scooter => "scooter",
            VehicleClass::DockedBike => {
                return Err(export_err(i, "docked bike in a dockless file"))
            }
        };
        w.write_record([
            t.start_instant.format(TS).to_string(),
            t.end_instant().format(TS).to_string(),
            a.lat.to_string(),
            a.lon.to_string(),
            b.lat.to_string(),
            b.lon.to_string(),
            String::new(),
            class.to_string(),
            "false".to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

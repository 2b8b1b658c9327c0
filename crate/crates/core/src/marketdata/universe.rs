//! The 21-commodity reference universe with exchange contract specifications.

use super::{CommoditySpec, Sector, SpecTable};

/// `(id, sector, multiplier, tick_size, typical price)`.
pub const UNIVERSE: [(&str, Sector, f64, f64, f64); 21] = [
    ("crude_oil", Sector::Energy, 1000.0, 0.01, 60.0),
    ("gasoline", Sector::Energy, 42000.0, 0.0001, 2.0),
    ("heating_oil", Sector::Energy, 42000.0, 0.0001, 2.0),
    ("corn", Sector::Grains, 5000.0, 0.0025, 4.0),
    ("oats", Sector::Grains, 5000.0, 0.0025, 3.0),
    ("rough_rice", Sector::Grains, 2000.0, 0.005, 12.0),
    ("wheat", Sector::Grains, 5000.0, 0.0025, 5.0),
    ("cotton", Sector::Industrials, 50000.0, 0.0001, 0.7),
    ("lumber", Sector::Industrials, 110.0, 0.1, 400.0),
    ("feeder_cattle", Sector::Meats, 50000.0, 0.00025, 1.4),
    ("live_cattle", Sector::Meats, 40000.0, 0.00025, 1.1),
    ("live_hogs", Sector::Meats, 40000.0, 0.00025, 0.8),
    ("copper", Sector::Metals, 25000.0, 0.0005, 3.0),
    ("gold", Sector::Metals, 100.0, 0.1, 1300.0),
    ("silver", Sector::Metals, 5000.0, 0.005, 18.0),
    ("soybean_meal", Sector::Oilseeds, 100.0, 0.1, 300.0),
    ("soybean_oil", Sector::Oilseeds, 60000.0, 0.0001, 0.35),
    ("soybeans", Sector::Oilseeds, 5000.0, 0.0025, 10.0),
    ("cocoa", Sector::Softs, 10.0, 1.0, 2500.0),
    ("coffee", Sector::Softs, 37500.0, 0.0005, 1.3),
    ("orange_juice", Sector::Softs, 15000.0, 0.0005, 1.3),
];

/// Commodities whose curves get the seasonal adjustment in the "NINE" setting.
pub const SEASONAL_NINE: [&str; 9] = [
    "corn",
    "cotton",
    "feeder_cattle",
    "gasoline",
    "heating_oil",
    "live_cattle",
    "live_hogs",
    "soybeans",
    "wheat",
];

/// Spec table for the full reference universe.
pub fn reference_specs() -> SpecTable {
    SpecTable(
        UNIVERSE
            .iter()
            .map(|(id, sector, multiplier, tick, _)| {
                (id.to_string(), CommoditySpec { sector: *sector, multiplier: *multiplier, tick_size: *tick })
            })
            .collect(),
    )
}

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use itinera_core::datagen::read_jsonl;
use itinera_core::model::Inventory;

/// Reads the inventory the service plans against.
///
/// A `.jsonl` file is a dataset: every record's inventory is merged, with
/// option ids prefixed by the record id (`r3/f12`) since records reuse ids.
/// Any other file holds a single inventory object.
pub fn load_inventory(path: &Path) -> Result<Inventory, String> {
    let shown = path.display();
    let file = File::open(path).map_err(|e| format!("{shown}: {e}"))?;
    let reader = BufReader::new(file);
    let inventory = if path.extension().is_some_and(|e| e == "jsonl") {
        let records = read_jsonl(reader).map_err(|e| format!("{shown}: {e}"))?;
        let mut merged = Inventory::default();
        for r in records {
            merged
                .flights
                .extend(r.inventory.flights.into_iter().map(|mut f| {
                    f.id = format!("{}/{}", r.id, f.id);
                    f
                }));
            merged
                .hotels
                .extend(r.inventory.hotels.into_iter().map(|mut h| {
                    h.id = format!("{}/{}", r.id, h.id);
                    h
                }));
        }
        merged
    } else {
        let value: serde_json::Value =
            serde_json::from_reader(reader).map_err(|e| format!("{shown}: {e}"))?;
        serde_json::from_value(value).map_err(|e| format!("{shown}: {e}"))?
    };
    inventory
        .validate()
        .map_err(|e| format!("{shown}: {}", e.0))?;
    Ok(inventory)
}

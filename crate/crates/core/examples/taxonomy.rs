//! Prints every (label, verification flag) pair with its aggregated class,
//! router target and noise bucket.
//!
//! ```text
//! cargo run --example taxonomy
//! ```

use reportsignal::taxonomy::{noise_type, GcrcClass, TargetClass, VerificationFlag};

fn main() {
    println!("{:<6} {:<5} {:<4} {:<7} noise", "label", "flag", "agg", "target");
    for class in GcrcClass::ALL {
        for flag in VerificationFlag::ALL {
            let flag_name = if flag == VerificationFlag::None { "-" } else { flag.as_str() };
            println!(
                "{:<6} {:<5} {:<4} {:<7} {}",
                class.as_str(),
                flag_name,
                class.aggregate().as_str(),
                TargetClass::of(class).as_str(),
                noise_type(class, flag).as_str()
            );
        }
    }
}

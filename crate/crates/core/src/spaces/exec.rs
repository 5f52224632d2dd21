use std::fmt;

use super::{HostSpace, MemorySpace, SimDeviceSpace};

/// A zero-sized tag naming a compute backend.
///
/// Each tag has exactly one accessible memory space. Routines take the tag by
/// value so the backend implementation is selected at compile time.
pub trait ExecutionSpace:
    Copy + Default + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    type AccessibleSpace: MemorySpace;

    /// Backend name as used on the command line.
    const NAME: &'static str;
}

/// The memory space reachable from execution space `E`.
pub type SpaceOf<E> = <E as ExecutionSpace>::AccessibleSpace;

/// Compatibility rule: implemented exactly when `Self::AccessibleSpace == M`.
#[diagnostic::on_unimplemented(
    message = "execution space `{Self}` is incompatible with memory space `{M}`",
    label = "`{Self}` cannot access data held in `{M}`",
    note = "allocate the containers in `<{Self} as ExecutionSpace>::AccessibleSpace` or pick a matching execution space"
)]
pub trait Accesses<M: MemorySpace>: ExecutionSpace {}

/// Compile-time check that `E` may operate on data in `M`.
///
/// ```
/// use portwave::spaces::{check_compatibility, HostSpace, Serial};
/// const _: () = check_compatibility::<Serial, HostSpace>();
/// ```
///
/// ```compile_fail
/// use portwave::spaces::{check_compatibility, SimDeviceSpace, Threaded};
/// const _: () = check_compatibility::<Threaded, SimDeviceSpace>();
/// ```
pub const fn check_compatibility<E: Accesses<M>, M: MemorySpace>() {}

macro_rules! execution_space {
    ($(#[$doc:meta])* $tag:ident => $space:ty, $name:literal) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
        pub struct $tag;

        impl ExecutionSpace for $tag {
            type AccessibleSpace = $space;
            const NAME: &'static str = $name;
        }

        impl Accesses<$space> for $tag {}

        impl fmt::Display for $tag {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str($name)
            }
        }
    };
}

execution_space!(
    /// Sequential reference backend.
    Serial => HostSpace, "serial"
);
execution_space!(
    /// Multithreaded host backend; rows are statically partitioned across
    /// the worker pool.
    Threaded => HostSpace, "threaded"
);
execution_space!(
    /// Backend of the simulated discrete device.
    SimDevice => SimDeviceSpace, "simdevice"
);

const _: () = check_compatibility::<Serial, SpaceOf<Serial>>();
const _: () = check_compatibility::<Threaded, SpaceOf<Threaded>>();
const _: () = check_compatibility::<SimDevice, SpaceOf<SimDevice>>();

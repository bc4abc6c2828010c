//! Recursive constructions: transversal designs from finite fields, GDD surgery, Wilson
//! weighting and group filling.

pub mod gf;
mod recipe;
mod td;
mod wilson;

pub use recipe::{parse_recipe, DesignRef, GroupSel, RecipeSpec, Resolver};
pub use td::{adjoin_and_delete, delete_point, dgdd_from_two_tds, extend_resolvable, td_from_mols, truncate_td};
pub use wilson::{
    fill_groups, identity_composition, product_expand, wilson_compose, Composition, CompositionRecipe, Filler,
    FillerUse, IngredientRegistry, WeightAssignment,
};

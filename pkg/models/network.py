"""
Reaction network value types: species, propensities, reactions.
"""
from typing import Annotated, Dict, Literal, Tuple, Union
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, model_validator


class Species(BaseModel):
    """A population dimension."""
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., pattern=r"^[A-Za-z_][A-Za-z0-9_.]*$")
    index: int = Field(..., ge=0)


class MassAction(BaseModel):
    """c times the number of reactant combinations."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["mass_action"] = "mass_action"
    rate: PositiveFloat


class Hill(BaseModel):
    """numerator / (offset + x_species)."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["hill"] = "hill"
    numerator: PositiveFloat
    species: int = Field(..., ge=0)
    offset: PositiveFloat = 1.0


class CustomFactor(BaseModel):
    """Single-variable factor of a separable propensity."""
    model_config = ConfigDict(frozen=True)

    name: Literal["inv", "lin", "exp"]
    species: int = Field(..., ge=0)
    args: Tuple[float, ...] = ()

    @model_validator(mode="after")
    def check_args(self):
        arity = {"inv": 1, "lin": 2, "exp": 1}[self.name]
        if len(self.args) != arity:
            raise ValueError(f"factor {self.name} takes {arity} argument(s), got {len(self.args)}")
        if self.name == "inv" and self.args[0] <= 0:
            raise ValueError("inv offset must be positive")
        if self.name == "lin" and (self.args[0] < 0 or self.args[1] < 0):
            raise ValueError("lin coefficients must be nonnegative")
        if self.name == "lin" and self.args == (0.0, 0.0):
            raise ValueError("lin factor is identically zero")
        if self.name == "exp" and self.args[0] == 0:
            raise ValueError("exp rate must be nonzero (use a constant coefficient instead)")
        return self


class SeparableCustom(BaseModel):
    """coefficient times a product of per-species factors."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["custom"] = "custom"
    coefficient: PositiveFloat
    factors: Tuple[CustomFactor, ...] = ()

    @model_validator(mode="after")
    def check_separable(self):
        seen = [factor.species for factor in self.factors]
        if len(seen) != len(set(seen)):
            raise ValueError("at most one custom factor per species")
        return self


PropensitySpec = Annotated[Union[MassAction, Hill, SeparableCustom], Field(discriminator="kind")]


class Reaction(BaseModel):
    """loss -> gain at the rate given by the propensity."""
    model_config = ConfigDict(frozen=True)

    name: str
    loss: Tuple[int, ...]
    gain: Tuple[int, ...]
    propensity: PropensitySpec

    @model_validator(mode="after")
    def check_vectors(self):
        if len(self.loss) != len(self.gain):
            raise ValueError(f"reaction {self.name}: loss and gain lengths differ")
        if any(v < 0 for v in self.loss + self.gain):
            raise ValueError(f"reaction {self.name}: stoichiometric coefficients must be >= 0")
        if not any(self.loss) and not any(self.gain):
            raise ValueError(f"reaction {self.name}: both sides empty")
        return self

    @property
    def change(self) -> Tuple[int, ...]:
        return tuple(g - l for g, l in zip(self.gain, self.loss))


class ReactionNetwork(BaseModel):
    """Species, reactions and the resolved parameter table."""
    model_config = ConfigDict(frozen=True)

    species: Tuple[Species, ...]
    reactions: Tuple[Reaction, ...]
    parameters: Dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_dimensions(self):
        names = [s.name for s in self.species]
        if len(set(names)) != len(names):
            raise ValueError("species names must be unique")
        if [s.index for s in self.species] != list(range(len(self.species))):
            raise ValueError("species indices must be contiguous from 0")
        if not self.reactions:
            raise ValueError("at least one reaction is required")
        n = len(self.species)
        for reaction in self.reactions:
            if len(reaction.loss) != n:
                raise ValueError(
                    f"reaction {reaction.name}: {len(reaction.loss)} coefficients for {n} species"
                )
            spec = reaction.propensity
            referenced = [spec.species] if isinstance(spec, Hill) else []
            if isinstance(spec, SeparableCustom):
                referenced = [factor.species for factor in spec.factors]
            if any(index >= n for index in referenced):
                raise ValueError(f"reaction {reaction.name}: propensity references unknown species")
        return self

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def species_names(self) -> Tuple[str, ...]:
        return tuple(s.name for s in self.species)
